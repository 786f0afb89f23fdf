"""Regenerate the bundled synthetic mini-corpus under src/xlstr/data/minicorpus."""

from pathlib import Path

from xlstr.synthetic import MINI_COUNTS, write_corpus

if __name__ == "__main__":
    dest = Path(__file__).resolve().parents[1] / "src" / "xlstr" / "data" / "minicorpus"
    manifest = write_corpus(dest, MINI_COUNTS, seed=2024)
    print(f"wrote {sum(sum(v.values()) for v in manifest['counts'].values())} instances to {dest}")
