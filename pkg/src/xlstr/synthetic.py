"""Deterministic synthetic STR corpora.

Sentences are bags of concept words drawn from a small aligned lexicon; the
second sentence of a pair keeps each concept of the first with probability
``r`` and the gold score mixes the concept overlap with ``r``. This gives a
lexical signal a feature-based scorer can learn, in every task language.
"""

from __future__ import annotations

import json
import random
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from .corpus import Dataset, Split, STRInstance, serialize_dataset

# Instance counts of the public shared-task release (lang -> split -> n).
SHARED_TASK_COUNTS: dict[str, dict[str, int]] = {
    "eng": {"train": 5500, "dev": 249, "test": 2600},
    "esp": {"train": 1562, "dev": 139, "test": 140},
    "afr": {"dev": 375, "test": 375},
    "hin": {"dev": 288, "test": 968},
    "pan": {"dev": 242, "test": 634},
    "amh": {"train": 992, "dev": 95, "test": 171},
    "arb": {"dev": 32, "test": 595},
    "arq": {"train": 1261, "dev": 97, "test": 583},
    "ary": {"train": 924, "dev": 70, "test": 425},
    "hau": {"train": 1736, "dev": 212, "test": 594},
    "ind": {"dev": 144, "test": 360},
    "kin": {"train": 778, "dev": 222, "test": 222},
    "mar": {"train": 1200, "dev": 293},
    "tel": {"train": 1170, "dev": 130},
}

# Split layout mirrors the release; sizes are small enough to ship.
MINI_COUNTS: dict[str, dict[str, int]] = {
    "eng": {"train": 60, "dev": 14, "test": 20},
    "esp": {"train": 30, "dev": 12, "test": 12},
    "afr": {"dev": 12, "test": 14},
    "hin": {"dev": 12, "test": 16},
    "pan": {"dev": 10, "test": 14},
    "amh": {"train": 24, "dev": 10, "test": 12},
    "arb": {"dev": 8, "test": 16},
    "arq": {"train": 26, "dev": 10, "test": 14},
    "ary": {"train": 22, "dev": 8, "test": 12},
    "hau": {"train": 32, "dev": 12, "test": 14},
    "ind": {"dev": 10, "test": 12},
    "kin": {"train": 20, "dev": 12, "test": 12},
    "mar": {"train": 24, "dev": 12},
    "tel": {"train": 24, "dev": 10},
}

_STOP = {"hin": "।", "mar": "।", "pan": "।", "amh": "።"}


@lru_cache(maxsize=None)
def load_lexicon() -> dict[str, tuple[str, ...]]:
    """Concept-aligned word lists keyed by language (row i is the same concept)."""
    text = (resources.files("xlstr") / "data" / "lexicon.tsv").read_text(encoding="utf-8")
    rows = [ln.split("\t") for ln in text.splitlines() if ln and not ln.startswith("#")]
    header, body = rows[0], rows[1:]
    return {lang: tuple(r[j] for r in body) for j, lang in enumerate(header) if j > 0}


def _pair(rng: random.Random, n_concepts: int):
    length = rng.randint(4, 8)
    first = [rng.randrange(n_concepts) for _ in range(length)]
    r = rng.random()
    second = [c if rng.random() < r else rng.randrange(n_concepts) for c in first]
    if rng.random() < 0.3:
        second.append(rng.randrange(n_concepts))
    if rng.random() < 0.3 and len(second) > 3:
        second.pop(rng.randrange(len(second)))
    a, b = set(first), set(second)
    overlap = len(a & b) / len(a | b)
    score = 0.75 * overlap + 0.25 * r + rng.gauss(0.0, 0.05)
    return first, second, round(min(1.0, max(0.0, score)), 2)


def synth_dataset(lang: str, split: "Split | str", n: int, seed: int = 0,
                  labeled: bool = True) -> Dataset:
    split = Split.parse(split)
    words = load_lexicon()[lang]
    rng = random.Random(f"{seed}:{lang}:{split.value}")
    stop = _STOP.get(lang, ".")
    out = []
    for i in range(n):
        first, second, score = _pair(rng, len(words))
        s1 = " ".join(words[c] for c in first) + " " + stop
        s2 = " ".join(words[c] for c in second) + " " + stop
        out.append(STRInstance(f"{lang}-{split.value}-{i:04d}", s1, s2, lang, split,
                               score if labeled or split is not Split.TEST else None))
    return Dataset(lang, split, tuple(out))


def write_corpus(root: "str | Path", counts: Mapping[str, Mapping[str, int]] = MINI_COUNTS,
                 seed: int = 0) -> dict:
    """Write ``<root>/<lang>/<split>.csv`` for every entry of ``counts`` plus a manifest."""
    root = Path(root)
    manifest = {"seed": seed, "counts": {}}
    for lang in sorted(counts):
        for split, n in sorted(counts[lang].items()):
            ds = synth_dataset(lang, split, n, seed)
            path = root / lang / f"{split}.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(serialize_dataset(ds, "csv"), encoding="utf-8")
            manifest["counts"].setdefault(lang, {})[split] = n
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                        encoding="utf-8")
    return manifest


def minicorpus_root() -> Path:
    return Path(str(resources.files("xlstr") / "data" / "minicorpus"))


def minicorpus_manifest() -> dict:
    return json.loads((minicorpus_root() / "manifest.json").read_text(encoding="utf-8"))
