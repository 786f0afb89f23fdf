"""STR datasets: parsing, statistics and training-set assembly."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    ConfigError,
    DuplicatePairId,
    EncodingError,
    MalformedRow,
    MissingDataset,
    NoSourcesSelected,
    ScoreOutOfRange,
)
from .langsim import (
    DEFAULT_FAMILIES,
    FamilyTable,
    FeatureKind,
    SimilarityMatrix,
    check_language,
    family_sources,
    load_similarity_matrix,
    nearest_sources,
)

# Column order used when rendering statistics.
STATS_ORDER = ("eng", "esp", "afr", "hin", "pan", "amh", "arb", "arq",
               "ary", "hau", "ind", "kin", "mar", "tel")


class Split(str, enum.Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"

    @classmethod
    def parse(cls, value: "str | Split") -> "Split":
        if isinstance(value, cls):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            raise ConfigError(f"unknown split {value!r}") from None

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class STRInstance:
    pair_id: str
    sent1: str
    sent2: str
    lang: str
    split: Split
    score: float | None = None

    def __post_init__(self):
        if not self.sent1.strip() or not self.sent2.strip():
            raise MalformedRow(f"{self.pair_id}: empty sentence")
        if self.score is not None and not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ScoreOutOfRange(f"{self.pair_id}: score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class Dataset:
    lang: str
    split: Split
    instances: tuple[STRInstance, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        seen = set()
        for inst in self.instances:
            if inst.lang != self.lang or inst.split != self.split:
                raise MalformedRow(f"{inst.pair_id}: belongs to {inst.lang}/{inst.split}")
            if inst.pair_id in seen:
                raise DuplicatePairId(f"{inst.pair_id} appears twice in {self.lang}/{self.split}")
            seen.add(inst.pair_id)
            if inst.score is None and self.split is not Split.TEST:
                raise MalformedRow(f"{inst.pair_id}: {self.split} instances need a score")

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    @property
    def labeled(self) -> bool:
        return bool(self.instances) and all(i.score is not None for i in self.instances)

    @property
    def scores(self) -> list[float]:
        return [i.score for i in self.instances]


# --- parsing ----------------------------------------------------------------

def _parse_score(raw: str, pair_id: str, split: Split) -> float | None:
    raw = raw.strip()
    if raw == "":
        if split is Split.TEST:
            return None
        raise MalformedRow(f"{pair_id}: missing score in {split} data")
    try:
        score = float(raw)
    except ValueError:
        raise MalformedRow(f"{pair_id}: score {raw!r} is not a number") from None
    if not math.isfinite(score) or not 0.0 <= score <= 1.0:
        raise ScoreOutOfRange(f"{pair_id}: score {raw} outside [0, 1]")
    return score


def _split_text(text: str, pair_id: str) -> tuple[str, str]:
    parts = text.replace("\r\n", "\n").split("\n")
    if len(parts) != 2:
        raise MalformedRow(f"{pair_id}: Text holds {len(parts)} sentences, expected 2")
    s1, s2 = parts[0].strip(), parts[1].strip()
    if not s1 or not s2:
        raise MalformedRow(f"{pair_id}: empty sentence")
    return s1, s2


def _rows_csv(text: str, split: Split):
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None:
        return
    cols = [h.strip() for h in header]
    if "PairID" not in cols or "Text" not in cols:
        raise MalformedRow(f"CSV header must contain PairID and Text, got {cols}")
    i_id, i_text = cols.index("PairID"), cols.index("Text")
    i_score = cols.index("Score") if "Score" in cols else None
    if i_score is None and split is not Split.TEST:
        raise MalformedRow(f"{split} data needs a Score column")
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(cols):
            raise MalformedRow(f"row {lineno}: {len(row)} fields, expected {len(cols)}")
        pair_id = row[i_id].strip()
        s1, s2 = _split_text(row[i_text], pair_id)
        yield pair_id, s1, s2, row[i_score] if i_score is not None else ""


def _rows_tsv(text: str, split: Split):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if lineno == 1 and cells[0].strip().lower() in ("pair_id", "pairid"):
            continue
        if len(cells) == 3 and split is Split.TEST:
            cells.append("")
        if len(cells) != 4:
            raise MalformedRow(f"line {lineno}: {len(cells)} fields, expected 4")
        pair_id, s1, s2, score = (c.strip() for c in cells)
        if not s1 or not s2:
            raise MalformedRow(f"{pair_id}: empty sentence")
        yield pair_id, s1, s2, score


def parse_dataset(content: "bytes | str", lang: str, split: "Split | str", fmt: str = "auto") -> Dataset:
    """Parse a shared-task CSV (``PairID,Text,Score``) or the 4-column TSV fallback."""
    split = Split.parse(split)
    check_language(lang)
    if isinstance(content, bytes):
        try:
            text = content.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"{lang}/{split}: not valid UTF-8 ({exc})") from None
    else:
        text = content.lstrip("﻿")
    if fmt == "auto":
        first = text.split("\n", 1)[0]
        fmt = "csv" if first.startswith("PairID") or "\t" not in first else "tsv"
    rows = _rows_csv(text, split) if fmt == "csv" else _rows_tsv(text, split)
    instances = []
    seen = set()
    for pair_id, s1, s2, raw_score in rows:
        if not pair_id:
            raise MalformedRow("row without PairID")
        if pair_id in seen:
            raise DuplicatePairId(f"{pair_id} appears twice in {lang}/{split}")
        seen.add(pair_id)
        instances.append(STRInstance(pair_id, s1, s2, lang, split,
                                     _parse_score(raw_score, pair_id, split)))
    return Dataset(lang, split, tuple(instances))


# Characters that would break a CSV Text cell or a TSV row; str.splitlines
# treats all of them as line boundaries, and the csv module cannot write NUL.
_BREAKS = re.compile("[\x00\t\n\r\x0b\x0c\x1c\x1d\x1e\x85\u2028\u2029]+")


def _clean(text: str) -> str:
    return _BREAKS.sub(" ", text).strip()


def format_score(score: float | None) -> str:
    return "" if score is None else repr(float(score))


def serialize_dataset(ds: Dataset, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["PairID", "Text", "Score"])
        for inst in ds.instances:
            writer.writerow([inst.pair_id, f"{_clean(inst.sent1)}\n{_clean(inst.sent2)}",
                             format_score(inst.score)])
        return buf.getvalue()
    if fmt == "tsv":
        return serialize_pairs(ds.instances)
    raise ValueError(f"unknown format {fmt!r}")


def serialize_pairs(instances: Iterable[STRInstance]) -> str:
    lines = ["pair_id\tsent1\tsent2\tscore"]
    for inst in instances:
        lines.append("\t".join([inst.pair_id, _clean(inst.sent1), _clean(inst.sent2),
                                format_score(inst.score)]))
    return "\n".join(lines) + "\n"


def dataset_path(root: "str | Path", lang: str, split: "Split | str") -> Path | None:
    """Locate ``<root>/<lang>/<split>.csv`` (or ``.tsv``, or ``<lang>_<split>.csv``)."""
    split = Split.parse(split)
    base = Path(root) / lang
    for name in (f"{split}.csv", f"{split}.tsv", f"{lang}_{split}.csv", f"{lang}_{split}.tsv"):
        if (base / name).is_file():
            return base / name
    return None


def load_dataset(root: "str | Path", lang: str, split: "Split | str") -> Dataset:
    path = dataset_path(root, lang, split)
    if path is None:
        raise MissingDataset(f"no {split} data for {lang} under {root}")
    return parse_dataset(path.read_bytes(), lang, split,
                         fmt="tsv" if path.suffix == ".tsv" else "auto")


def load_corpus(root: "str | Path", langs: Iterable[str] | None = None) -> dict[tuple[str, Split], Dataset]:
    """Every dataset present under ``root``, keyed by ``(lang, split)``."""
    root = Path(root)
    if not root.is_dir():
        raise MissingDataset(f"data root {root} does not exist")
    if langs is None:
        langs = sorted(p.name for p in root.iterdir() if p.is_dir() and len(p.name) == 3)
    out = {}
    for lang in langs:
        for split in Split:
            if dataset_path(root, lang, split) is not None:
                out[(lang, split)] = load_dataset(root, lang, split)
    return out


# --- statistics -------------------------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    counts: Mapping[str, Mapping[Split, int]]

    def count(self, lang: str, split: "Split | str") -> int | None:
        return self.counts.get(lang, {}).get(Split.parse(split))

    def total(self, split: "Split | str") -> int:
        split = Split.parse(split)
        return sum(c.get(split, 0) for c in self.counts.values())

    def lang_total(self, lang: str) -> int:
        return sum(self.counts.get(lang, {}).values())

    @property
    def languages(self) -> list[str]:
        known = [lang for lang in STATS_ORDER if lang in self.counts]
        return known + sorted(set(self.counts) - set(known))

    def to_dict(self) -> dict:
        return {
            "counts": {lang: {s.value: n for s, n in sorted(self.counts[lang].items())}
                       for lang in self.languages},
            "totals": {s.value: self.total(s) for s in Split},
        }

    def render(self) -> str:
        langs = self.languages
        header = ["", *langs, "total"]
        rows = [header]
        for split in Split:
            row = [split.value.capitalize()]
            for lang in langs:
                n = self.count(lang, split)
                row.append("-" if n is None else f"{n:,}")
            row.append(f"{self.total(split):,}")
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        return "\n".join("  ".join(c.rjust(w) if i else c.ljust(w)
                                   for i, (c, w) in enumerate(zip(r, widths)))
                         for r in rows) + "\n"


def stats(datasets: Iterable[Dataset]) -> CorpusStats:
    counts: dict[str, dict[Split, int]] = {}
    for ds in datasets:
        per = counts.setdefault(ds.lang, {})
        per[ds.split] = per.get(ds.split, 0) + len(ds)
    return CorpusStats(counts)


# --- assembly ---------------------------------------------------------------

class StrategyKind(str, enum.Enum):
    ENGLISH_ONLY = "english-only"
    MS_ALL = "ms-all"
    MS_FAM = "ms-fam"
    KNN_PLUS_ENGLISH = "knn+eng"
    KNN_SINGLE = "knn"

    @classmethod
    def parse(cls, value: "str | StrategyKind") -> "StrategyKind":
        if isinstance(value, cls):
            return value
        v = value.strip().lower()
        aliases = {"eng": "english-only", "englishonly": "english-only", "msall": "ms-all",
                   "msfam": "ms-fam", "knnplusenglish": "knn+eng", "knn-eng": "knn+eng",
                   "knnsingle": "knn"}
        try:
            return cls(aliases.get(v, v))
        except ValueError:
            raise ConfigError(f"unknown strategy {value!r}") from None

    @property
    def is_knn(self) -> bool:
        return self in (StrategyKind.KNN_PLUS_ENGLISH, StrategyKind.KNN_SINGLE)


@dataclass(frozen=True)
class AssemblyStrategy:
    kind: StrategyKind
    k: int | None = None
    feature: FeatureKind | None = None
    augment: bool = False
    romanize: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind.parse(self.kind))
        if self.feature is not None:
            object.__setattr__(self, "feature", FeatureKind.parse(self.feature))
        if self.kind.is_knn:
            if self.feature is None:
                raise ConfigError(f"{self.kind.value} needs a feature kind")
            if self.k is None or self.k < 1:
                raise ConfigError(f"{self.kind.value} needs k >= 1")
        elif self.feature is not None or self.k is not None:
            raise ConfigError(f"{self.kind.value} takes neither k nor feature")

    @property
    def descriptor(self) -> str:
        name = {
            StrategyKind.ENGLISH_ONLY: "eng",
            StrategyKind.MS_ALL: "MS-All",
            StrategyKind.MS_FAM: "MS-Fam",
            StrategyKind.KNN_PLUS_ENGLISH: f"kNN+eng(k={self.k},{self.feature})",
            StrategyKind.KNN_SINGLE: f"kNN(k={self.k},{self.feature})",
        }[self.kind]
        if self.augment:
            name += "+MT"
        if self.romanize:
            name += "+TL"
        return name

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "k": self.k,
                "feature": None if self.feature is None else self.feature.value,
                "augment": self.augment, "romanize": self.romanize}


ORIGINAL = "original"
ROMANIZED_SUFFIX = "+romanized"


def translated_from(lang: str) -> str:
    return f"translated-from:{lang}"


@dataclass(frozen=True)
class TrainSet:
    target: str
    strategy: AssemblyStrategy
    sources: tuple[str, ...]
    instances: tuple[STRInstance, ...]
    provenance: tuple[str, ...]
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.instances) != len(self.provenance):
            raise ValueError("provenance must tag every instance")
        for inst, tag in zip(self.instances, self.provenance):
            if inst.lang == self.target and tag.startswith(ORIGINAL):
                raise ValueError(f"{inst.pair_id}: target-language data leaked into training")

    def __len__(self) -> int:
        return len(self.instances)

    def provenance_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(self.provenance).items()))

    def language_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(i.lang for i in self.instances).items()))

    def sidecar(self, config_hash: str | None = None) -> dict:
        out = {
            "target": self.target,
            "strategy": self.strategy.to_dict(),
            "descriptor": self.strategy.descriptor,
            "sources": list(self.sources),
            "n": len(self.instances),
            "provenance_counts": self.provenance_counts(),
            "language_counts": self.language_counts(),
            "diagnostics": list(self.diagnostics),
        }
        if config_hash is not None:
            out["config_hash"] = config_hash
        return out


def write_trainset(ts: TrainSet, path: "str | Path", config_hash: str | None = None) -> tuple[Path, Path]:
    """Write the TSV body and its JSON sidecar next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_pairs(ts.instances), encoding="utf-8")
    side = path.with_suffix(".json")
    side.write_text(json.dumps(ts.sidecar(config_hash), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path, side


def select_sources(strategy: AssemblyStrategy, target: str, available: Iterable[str],
                   matrix: SimilarityMatrix | None = None,
                   families: FamilyTable = DEFAULT_FAMILIES,
                   diagnostics: list[str] | None = None) -> list[str]:
    """Donor languages for ``target`` in canonical order (eng first when included)."""
    avail = set(available) - {target}
    kind = strategy.kind
    if kind is StrategyKind.ENGLISH_ONLY:
        sources = ["eng"] if target != "eng" else []
    elif kind is StrategyKind.MS_ALL:
        sources = sorted(avail)
    elif kind is StrategyKind.MS_FAM:
        sources = sorted(family_sources(target, avail, families))
    else:
        if matrix is None:
            matrix = load_similarity_matrix(strategy.feature)
        cands = avail - {"eng"} if kind is StrategyKind.KNN_PLUS_ENGLISH else avail
        picked = nearest_sources(target, strategy.k, matrix, cands, diagnostics)
        sources = (["eng"] + picked) if kind is StrategyKind.KNN_PLUS_ENGLISH else picked
    if "eng" in sources:
        sources = ["eng"] + [s for s in sources if s != "eng"]
    if not sources:
        raise NoSourcesSelected(f"{strategy.descriptor} selects no source language for {target}")
    return sources


def assemble(strategy: AssemblyStrategy, target: str, train_data: Mapping[str, Dataset],
             matrix: SimilarityMatrix | None = None,
             families: FamilyTable = DEFAULT_FAMILIES,
             translator=None, tables=None) -> TrainSet:
    """Concatenate the training data of the donors ``strategy`` picks for ``target``.

    The target's own labeled data never enters the result. With ``augment``
    the donors are cross-translated (``translator`` required); with
    ``romanize`` the union is then romanized.
    """
    check_language(target)
    diagnostics: list[str] = []
    sources = select_sources(strategy, target, train_data.keys(), matrix, families, diagnostics)
    missing = [s for s in sources if s not in train_data]
    if missing:
        raise MissingDataset(f"no training data for {', '.join(missing)}")

    if strategy.augment:
        from .augment import cross_translate
        if translator is None:
            raise ConfigError("augmentation requested without a translator")
        aug = cross_translate([train_data[s] for s in sources], translator)
        # canonical augmented order is by language code; re-key to source order
        by_lang: dict[str, list] = {s: [] for s in sources}
        for inst, tag in zip(aug.instances, aug.provenance):
            by_lang[inst.lang].append((inst, tag))
        pairs = [p for s in sources for p in by_lang[s]]
    else:
        pairs = [(inst, ORIGINAL) for s in sources for inst in train_data[s].instances]

    if strategy.romanize:
        from .translit import default_tables, romanize_instance
        tabs = tables if tables is not None else default_tables()
        out = []
        for inst, tag in pairs:
            rom = romanize_instance(inst, tabs)
            out.append((rom, tag + ROMANIZED_SUFFIX if rom != inst else tag))
        pairs = out

    return TrainSet(
        target=target,
        strategy=strategy,
        sources=tuple(sources),
        instances=tuple(p[0] for p in pairs),
        provenance=tuple(p[1] for p in pairs),
        diagnostics=tuple(diagnostics),
    )


def train_sets(corpus: Mapping[tuple[str, Split], Dataset]) -> dict[str, Dataset]:
    """The Train-split datasets of a corpus keyed by language."""
    return {lang: ds for (lang, split), ds in corpus.items() if split is Split.TRAIN}


def concat_datasets(datasets: Sequence[Dataset]) -> list[STRInstance]:
    return [inst for ds in datasets for inst in ds.instances]
