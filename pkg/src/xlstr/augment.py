"""Balanced cross-translation of source-language training sets."""

from __future__ import annotations

import itertools
import shlex
import subprocess
import threading
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from . import kernels
from .corpus import ORIGINAL, Dataset, Split, STRInstance, translated_from
from .errors import MissingCapability, TranslationFailure


class Translator(Protocol):
    """Anything that can translate text between declared language pairs.

    Implementations must be deterministic for identical inputs within a run.
    """

    def supports(self, src: str, tgt: str) -> bool: ...

    def translate(self, text: str, src: str, tgt: str) -> str: ...


class IdentityTranslator:
    """Returns its input unchanged; supports every pair."""

    name = "identity"

    def supports(self, src, tgt):
        return True

    def translate(self, text, src, tgt):
        return text


class DictionaryTranslator:
    """Token-by-token lookup; unknown tokens pass through unchanged."""

    name = "dictionary"

    def __init__(self, tables: dict[tuple[str, str], dict[str, str]]):
        self.tables = tables

    @classmethod
    def from_lexicon(cls, lexicon: dict[str, Sequence[str]] | None = None) -> "DictionaryTranslator":
        """Build all pairwise tables from a concept-aligned word list."""
        if lexicon is None:
            from .synthetic import load_lexicon
            lexicon = load_lexicon()
        tables = {}
        for src, tgt in itertools.permutations(sorted(lexicon), 2):
            table: dict[str, str] = {}
            for a, b in zip(lexicon[src], lexicon[tgt]):
                table.setdefault(a, b)
            tables[(src, tgt)] = table
        return cls(tables)

    @classmethod
    def from_file(cls, path: "str | Path") -> "DictionaryTranslator":
        """Read ``src<TAB>tgt<TAB>source_token<TAB>target_token`` lines."""
        tables: dict[tuple[str, str], dict[str, str]] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            src, tgt, a, b = line.split("\t")
            tables.setdefault((src, tgt), {}).setdefault(a, b)
        return cls(tables)

    def supports(self, src, tgt):
        return (src, tgt) in self.tables

    def translate(self, text, src, tgt):
        table = self.tables[(src, tgt)]
        return " ".join(table.get(tok, tok) for tok in text.split())


class SubprocessTranslator:
    """Adapter for an external MT process speaking a line protocol.

    Each request is one line ``SRC<TAB>TGT<TAB>text``; the process answers
    with exactly one line of translated text, in order.
    """

    name = "subprocess"

    def __init__(self, command: "str | Sequence[str]", timeout: float = 30.0,
                 pairs: Iterable[tuple[str, str]] | None = None):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self.pairs = None if pairs is None else set(pairs)
        self._proc = None
        self._lock = threading.Lock()

    def supports(self, src, tgt):
        return self.pairs is None or (src, tgt) in self.pairs

    def _process(self):
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                          text=True, encoding="utf-8", bufsize=1)
        return self._proc

    def translate(self, text, src, tgt):
        flat = " ".join(text.split())
        with self._lock:
            proc = self._process()
            result: list[str] = []
            reader = threading.Thread(target=lambda: result.append(proc.stdout.readline()))
            try:
                proc.stdin.write(f"{src}\t{tgt}\t{flat}\n")
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise TranslationFailure(f"translator process died: {exc}") from None
            reader.start()
            reader.join(self.timeout)
            if reader.is_alive():
                self.close()
                raise TranslationFailure(f"translator timed out after {self.timeout}s")
            if not result or not result[0]:
                raise TranslationFailure("translator closed its output")
            return result[0].rstrip("\n")

    def close(self):
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def __del__(self):
        try:
            self.close()
        except Exception:  # noqa: BLE001
            pass


def make_translator(spec: str):
    """``identity``, ``dictionary`` (bundled lexicon), ``dictionary:<path>`` or ``cmd:<command>``."""
    if spec == "identity":
        return IdentityTranslator()
    if spec == "dictionary":
        return DictionaryTranslator.from_lexicon()
    if spec.startswith("dictionary:"):
        return DictionaryTranslator.from_file(spec.split(":", 1)[1])
    if spec.startswith("cmd:"):
        return SubprocessTranslator(spec.split(":", 1)[1])
    from .errors import ConfigError
    raise ConfigError(f"unknown translator spec {spec!r}")


@dataclass(frozen=True)
class AuditRecord:
    """Similarity of the two translated sentences next to the copied gold score."""

    pair_id: str
    src: str
    tgt: str
    probe: float
    score: float | None


@dataclass(frozen=True)
class AugmentedSet:
    languages: tuple[str, ...]
    instances: tuple[STRInstance, ...]
    provenance: tuple[str, ...]
    audit: tuple[AuditRecord, ...]

    def __len__(self):
        return len(self.instances)

    def balance(self) -> dict[str, int]:
        counts = Counter(i.lang for i in self.instances)
        return {lang: counts.get(lang, 0) for lang in self.languages}

    def flagged(self, min_probe: float = 0.9, max_score: float = 0.9) -> list[AuditRecord]:
        """Translated pairs that became near-identical while their label says otherwise."""
        return [a for a in self.audit
                if a.probe >= min_probe and a.score is not None and a.score < max_score]


def cross_translate(sets: Sequence[Dataset], translator: Translator) -> AugmentedSet:
    """Translate every instance into every other input language.

    With L languages and N instances in total each language ends up with N
    instances and the result holds L * N. Scores are copied verbatim. Order is
    canonical: by language, originals first, then translations ordered by
    source language, file order and target language.
    """
    by_lang: dict[str, Dataset] = {}
    for ds in sets:
        if ds.split is not Split.TRAIN:
            raise ValueError(f"only Train data is augmented, got {ds.lang}/{ds.split}")
        if ds.lang in by_lang:
            raise ValueError(f"{ds.lang} given twice")
        by_lang[ds.lang] = ds
    langs = sorted(by_lang)
    for src, tgt in itertools.permutations(langs, 2):
        if not translator.supports(src, tgt):
            raise MissingCapability(f"translator cannot translate {src} -> {tgt}")

    buckets: dict[str, list[tuple[STRInstance, str]]] = {
        lang: [(inst, ORIGINAL) for inst in by_lang[lang].instances] for lang in langs}
    audit = []
    for src in langs:
        for inst in by_lang[src].instances:
            for tgt in langs:
                if tgt == src:
                    continue
                try:
                    s1 = translator.translate(inst.sent1, src, tgt)
                    s2 = translator.translate(inst.sent2, src, tgt)
                except TranslationFailure as exc:
                    raise TranslationFailure(str(exc), inst.pair_id) from exc
                except Exception as exc:  # noqa: BLE001
                    raise TranslationFailure(f"{type(exc).__name__}: {exc}", inst.pair_id) from exc
                try:
                    new = replace(inst, sent1=s1, sent2=s2, lang=tgt)
                except ValueError as exc:
                    raise TranslationFailure(f"unusable translation: {exc}", inst.pair_id) from exc
                buckets[tgt].append((new, translated_from(src)))
                probe = kernels.ngram_cosine(s1.casefold(), s2.casefold(), 3)
                audit.append(AuditRecord(inst.pair_id, src, tgt, probe, inst.score))

    pairs = [p for lang in langs for p in buckets[lang]]
    return AugmentedSet(tuple(langs), tuple(p[0] for p in pairs),
                        tuple(p[1] for p in pairs), tuple(audit))
