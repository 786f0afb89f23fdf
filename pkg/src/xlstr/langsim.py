"""Language registry, similarity matrices and donor-language selection."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyOverlap,
    MalformedMatrixFile,
    MismatchedFeatureKind,
    TargetNotCovered,
    UnknownFeature,
    UnknownLanguage,
    ZeroNorm,
)

# The fourteen shared-task languages.
TASK_LANGUAGES = (
    "afr", "amh", "arb", "arq", "ary", "eng", "esp",
    "hau", "hin", "ind", "kin", "mar", "pan", "tel",
)

# Languages that ship labeled training data (the donor pool).
TRAIN_LANGUAGES = ("amh", "arq", "ary", "eng", "esp", "hau", "kin", "mar", "tel")

# Languages evaluated as cross-lingual targets.
TARGET_LANGUAGES = (
    "eng", "esp", "afr", "hin", "pan",
    "amh", "arb", "arq", "ary", "hau",
    "ind", "kin",
)

_CODE_RE = re.compile(r"^[a-z]{3}$")
_extensions: set[str] = set()


def register_language(code: str) -> str:
    """Admit a language outside the task registry (e.g. for user matrices)."""
    if not _CODE_RE.match(code):
        raise UnknownLanguage(f"not a 3-letter lowercase ISO code: {code!r}")
    _extensions.add(code)
    return code


def check_language(code: str) -> str:
    if not isinstance(code, str) or not _CODE_RE.match(code):
        raise UnknownLanguage(f"not a 3-letter lowercase ISO code: {code!r}")
    if code not in TASK_LANGUAGES and code not in _extensions:
        raise UnknownLanguage(f"{code!r} is not a registered language")
    return code


class FeatureKind(str, enum.Enum):
    CELL_STATE = "CellState"
    L2V_LRN = "L2V-LRN"
    L2V_PHO = "L2V-Pho"
    L2V_SYN = "L2V-Syn"
    L2V_INV = "L2V-Inv"
    L2V_FAM = "L2V-Fam"
    L2V_GEO = "L2V-Geo"

    @classmethod
    def parse(cls, value: "str | FeatureKind") -> "FeatureKind":
        if isinstance(value, cls):
            return value
        for kind in cls:
            if value == kind.value or value.lower() == kind.value.lower() or value == kind.name:
                return kind
        raise UnknownFeature(f"unknown feature kind {value!r}")

    def __str__(self) -> str:
        return self.value


# Operational family grouping used for the same-family multi-source
# strategy. tel sits with the Indo-European group and ind/kin are
# singletons, which is what the reported family variants require.
FAMILIES: dict[str, str] = {
    **{c: "IndoEuropean" for c in ("eng", "esp", "afr", "hin", "pan", "mar", "tel")},
    **{c: "AfroAsiatic" for c in ("amh", "arb", "arq", "ary", "hau")},
    "ind": "Singleton(ind)",
    "kin": "Singleton(kin)",
}


@dataclass(frozen=True)
class FamilyTable:
    assignments: Mapping[str, str] = field(default_factory=lambda: dict(FAMILIES))

    def family(self, lang: str) -> str:
        try:
            return self.assignments[lang]
        except KeyError:
            raise UnknownLanguage(f"{lang!r} has no family assignment") from None

    def is_singleton(self, lang: str) -> bool:
        return self.family(lang).startswith("Singleton")


DEFAULT_FAMILIES = FamilyTable()


# --- vectors ----------------------------------------------------------------

@dataclass(frozen=True)
class LanguageVector:
    lang: str
    feature: FeatureKind
    values: tuple[float, ...]
    mask: tuple[bool, ...] | None = None

    def __post_init__(self):
        mask = self.mask if self.mask is not None else (True,) * len(self.values)
        if len(mask) != len(self.values):
            raise ValueError("values and mask differ in length")
        if not any(mask):
            raise ValueError(f"vector for {self.lang} has no present component")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "mask", tuple(bool(m) for m in mask))


def cosine(u: LanguageVector, v: LanguageVector) -> float:
    """Cosine similarity over the components present in both vectors."""
    if u.feature != v.feature:
        raise MismatchedFeatureKind(f"{u.feature} vs {v.feature}")
    if len(u.values) != len(v.values):
        raise MismatchedFeatureKind("vectors of different dimensionality")
    joint = np.array(u.mask) & np.array(v.mask)
    if not joint.any():
        raise EmptyOverlap(f"{u.lang} and {v.lang} share no present component")
    a = np.asarray(u.values)[joint]
    b = np.asarray(v.values)[joint]
    na, nb = math.sqrt(float(a @ a)), math.sqrt(float(b @ b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm(f"zero magnitude over the shared components of {u.lang}/{v.lang}")
    sim = float(a @ b) / (na * nb)
    return max(-1.0, min(1.0, sim))


# --- matrices ---------------------------------------------------------------

@dataclass(frozen=True)
class SimilarityMatrix:
    """Source-by-target similarity table; uncovered cells are ``None``."""

    feature: FeatureKind
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]

    def __post_init__(self):
        if len(set(self.rows)) != len(self.rows) or len(set(self.cols)) != len(self.cols):
            raise MalformedMatrixFile("duplicate language in matrix header")
        if len(self.values) != len(self.rows):
            raise MalformedMatrixFile("row count mismatch")
        for row in self.values:
            if len(row) != len(self.cols):
                raise MalformedMatrixFile("row length mismatch")
            for v in row:
                if v is not None and not (math.isfinite(v) and -1.0 <= v <= 1.0):
                    raise MalformedMatrixFile(f"value out of range: {v}")

    def value(self, source: str, target: str) -> float | None:
        try:
            i = self.rows.index(source)
            j = self.cols.index(target)
        except ValueError:
            return None
        return self.values[i][j]

    def covers_target(self, target: str) -> bool:
        return target in self.cols

    @classmethod
    def from_vectors(cls, vectors: Sequence[LanguageVector],
                     sources: Sequence[str] | None = None,
                     targets: Sequence[str] | None = None) -> "SimilarityMatrix":
        """Build a matrix from raw language vectors via pairwise cosine."""
        if not vectors:
            raise ValueError("no vectors")
        by_lang = {v.lang: v for v in vectors}
        feature = vectors[0].feature
        sources = tuple(sources or by_lang)
        targets = tuple(targets or by_lang)
        values = []
        for s in sources:
            row = []
            for t in targets:
                if s == t or s not in by_lang or t not in by_lang:
                    row.append(None)
                    continue
                try:
                    row.append(cosine(by_lang[s], by_lang[t]))
                except (EmptyOverlap, ZeroNorm):
                    row.append(None)
            values.append(tuple(row))
        return cls(feature, sources, targets, tuple(values))


def _parse_cell(text: str, lineno: int) -> float | None:
    if text == "NA":
        return None
    try:
        v = float(text)
    except ValueError:
        raise MalformedMatrixFile(f"line {lineno}: non-numeric cell {text!r}") from None
    if not math.isfinite(v) or not -1.0 <= v <= 1.0:
        raise MalformedMatrixFile(f"line {lineno}: value {text} outside [-1, 1]")
    return v


def parse_matrix(text: str, expected: FeatureKind | None = None) -> SimilarityMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("feature="):
        raise MalformedMatrixFile("missing 'feature=' header or target line")
    try:
        feature = FeatureKind.parse(lines[0].split("=", 1)[1].strip())
    except UnknownFeature as exc:
        raise MalformedMatrixFile(str(exc)) from None
    if expected is not None and feature != expected:
        raise MalformedMatrixFile(f"file holds {feature}, expected {expected}")
    cols = tuple(lines[1].rstrip("\n").split("\t"))
    rows, values = [], []
    for lineno, line in enumerate(lines[2:], start=3):
        cells = line.rstrip("\n").split("\t")
        if len(cells) != len(cols) + 1:
            raise MalformedMatrixFile(
                f"line {lineno}: expected {len(cols) + 1} fields, got {len(cells)}")
        rows.append(cells[0])
        values.append(tuple(_parse_cell(c.strip(), lineno) for c in cells[1:]))
    for code in (*rows, *cols):
        if not _CODE_RE.match(code):
            raise MalformedMatrixFile(f"bad language code {code!r}")
    return SimilarityMatrix(feature, tuple(rows), cols, tuple(values))


def load_similarity_matrix(feature: "FeatureKind | str", source: "str | Path | None" = None) -> SimilarityMatrix:
    """Load the bundled matrix for ``feature`` or parse the file at ``source``."""
    kind = FeatureKind.parse(feature)
    if source is None:
        res = resources.files("xlstr") / "data" / "similarity" / f"{kind.value}.tsv"
        if not res.is_file():
            raise UnknownFeature(f"no bundled matrix for {kind}")
        text = res.read_text(encoding="utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")
    return parse_matrix(text, expected=kind)


def format_matrix(matrix: SimilarityMatrix) -> str:
    lines = [f"feature={matrix.feature.value}", "\t".join(matrix.cols)]
    for src, row in zip(matrix.rows, matrix.values):
        lines.append("\t".join([src] + ["NA" if v is None else f"{v:.2f}" for v in row]))
    return "\n".join(lines) + "\n"


# --- selection --------------------------------------------------------------

def nearest_sources(target: str, k: int, matrix: SimilarityMatrix,
                    candidates: Iterable[str] = TRAIN_LANGUAGES,
                    diagnostics: list[str] | None = None) -> list[str]:
    """The ``k`` candidates most similar to ``target``.

    Ties are broken by ascending ISO code, so the result does not depend on
    the order of ``candidates``. Candidates the matrix does not cover are
    skipped and, if ``diagnostics`` is given, reported there.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if not matrix.covers_target(target):
        raise TargetNotCovered(f"{target} is not covered by the {matrix.feature} matrix")
    scored = []
    for cand in sorted(set(candidates) - {target}):
        sim = matrix.value(cand, target)
        if sim is None:
            if diagnostics is not None:
                diagnostics.append(f"{cand}: not covered by {matrix.feature} for target {target}")
            continue
        scored.append((-sim, cand))
    scored.sort()
    return [cand for _, cand in scored[:k]]


def family_sources(target: str, available: Iterable[str],
                   table: FamilyTable = DEFAULT_FAMILIES) -> set[str]:
    fam = table.family(target)
    if table.is_singleton(target):
        return set()
    return {lang for lang in available
            if lang != target and table.assignments.get(lang) == fam}
