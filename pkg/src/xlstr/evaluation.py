"""Spearman rank correlation with tie handling, and result tables."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .corpus import Dataset, Split
from .errors import DegenerateInput, LengthMismatch, NonFiniteValue, UnlabeledDataset

# Column layout of the results table: (group, languages).
TABLE_GROUPS = (
    ("Indo-European", ("eng", "esp", "afr", "hin", "pan")),
    ("Afro-Asiatic", ("amh", "arb", "arq", "ary", "hau")),
    ("Other", ("ind", "kin")),
)
TABLE_COLUMNS = tuple(lang for _, langs in TABLE_GROUPS for lang in langs)

# Targets without full coverage by every typological feature; pass as
# ``avg_exclude`` to average like the published comparison of vector types.
L2V_UNCOVERED = frozenset({"eng", "pan", "arq", "ind", "kin"})
DEFAULT_AVG_EXCLUDE = frozenset({"eng"})


def ranks(values: Sequence[float]) -> np.ndarray:
    """Fractional ranks, 1 = smallest; ties share the mean of their positions."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("ranks of an empty sequence")
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue("ranks require finite values")
    return kernels.average_ranks(np.ascontiguousarray(v))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of the fractional ranks of ``x`` and ``y``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} vs {y.size} values")
    if x.size < 2:
        raise DegenerateInput("need at least two observations")
    rx, ry = ranks(x), ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    sxx, syy = float(rx @ rx), float(ry @ ry)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("correlation undefined for a constant vector")
    rho = float(rx @ ry) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, rho))


@dataclass(frozen=True)
class EvalReport:
    target: str
    split: Split
    n: int
    rho: float
    strategy: str = ""
    flags: Mapping[str, bool] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a report needs n >= 2")
        if not (math.isfinite(self.rho) and -1.0 <= self.rho <= 1.0):
            raise ValueError(f"rho out of range: {self.rho}")
        object.__setattr__(self, "flags", dict(sorted(dict(self.flags).items())))

    def to_dict(self) -> dict:
        return {"target": self.target, "split": self.split.value, "n": self.n, "rho": self.rho,
                "strategy": self.strategy, "flags": dict(self.flags), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "EvalReport":
        return cls(d["target"], Split.parse(d["split"]), int(d["n"]), float(d["rho"]),
                   d.get("strategy", ""), d.get("flags", {}), int(d.get("seed", 0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def evaluate(scorer, dataset: Dataset, strategy: str = "", flags: Mapping[str, bool] | None = None,
             seed: int = 0) -> EvalReport:
    """Correlate predictions with gold scores.

    ``scorer`` is either ``ScorerParams`` or a callable mapping an instance to
    a score.
    """
    if not dataset.labeled:
        raise UnlabeledDataset(f"{dataset.lang}/{dataset.split} has no gold scores")
    if len(dataset) < 2:
        raise DegenerateInput("need at least two instances")
    from .scorer import ScorerParams, featurize, predict
    if isinstance(scorer, ScorerParams):
        preds = predict(scorer, featurize(dataset.instances))
    else:
        preds = [float(scorer(inst)) for inst in dataset.instances]
    rho = spearman(preds, dataset.scores)
    return EvalReport(dataset.lang, dataset.split, len(dataset), rho, strategy, flags or {}, seed)


def format_cell(rho: float) -> str:
    """Two-decimal rendering, half-up, clamped to [-1, 1]."""
    d = Decimal(repr(min(1.0, max(-1.0, rho)))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return "0.00" if d == 0 else f"{d:.2f}"


def average_cells(cells: Iterable[str]) -> str:
    """Mean of rendered cells, recomputed from their two-decimal values."""
    vals = [Decimal(c) for c in cells]
    if not vals:
        return "-"
    mean = sum(vals) / len(vals)
    q = mean.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return "0.00" if q == 0 else f"{q:.2f}"


@dataclass
class ReportTable:
    columns: tuple[str, ...]
    rows: list[tuple[str, dict[str, str], str]]  # (label, cells, avg)
    avg_exclude: frozenset[str]

    def render(self) -> str:
        groups = [(g, [c for c in langs if c in self.columns]) for g, langs in TABLE_GROUPS]
        groups = [(g, cs) for g, cs in groups if cs]
        extra = [c for c in self.columns if c not in TABLE_COLUMNS]
        if extra:
            groups.append(("", extra))
        label_w = max([len("strategy")] + [len(r[0]) for r in self.rows])
        cw = 5
        group_line = " " * label_w
        for g, cs in groups:
            width = len(cs) * (cw + 1) - 1
            group_line += " | " + g[:width].center(width)
        head = "strategy".ljust(label_w)
        for _, cs in groups:
            head += " | " + " ".join(c.rjust(cw) for c in cs)
        head += " | " + "avg".rjust(cw)
        lines = [group_line.rstrip(), head, "-" * len(head)]
        for label, cells, avg in self.rows:
            line = label.ljust(label_w)
            for _, cs in groups:
                line += " | " + " ".join(cells.get(c, "-").rjust(cw) for c in cs)
            line += " | " + avg.rjust(cw)
            lines.append(line)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "avg_exclude": sorted(self.avg_exclude),
                "rows": [{"strategy": label, "cells": {c: cells[c] for c in self.columns if c in cells},
                          "avg": avg} for label, cells, avg in self.rows]}


def report_table(reports: Sequence[EvalReport], avg_exclude: Iterable[str] = DEFAULT_AVG_EXCLUDE,
                 failures: Iterable[tuple[str, str]] = (),
                 label: Callable[[EvalReport], str] | None = None) -> ReportTable:
    """One row per strategy, one column per target language.

    Only targets that occur are shown. ``failures`` lists (strategy, target)
    cells that were attempted but failed; they render as "-". The avg column
    skips ``avg_exclude`` and shows "-" whenever a counted cell is missing.
    A later report for the same cell replaces an earlier one.
    """
    label = label or (lambda r: r.strategy)
    exclude = frozenset(avg_exclude)
    row_order: list[str] = []
    cells: dict[str, dict[str, str]] = {}
    present: set[str] = set()
    for r in reports:
        key = label(r)
        if key not in cells:
            row_order.append(key)
            cells[key] = {}
        cells[key][r.target] = format_cell(r.rho)
        present.add(r.target)
    for key, target in failures:
        if key not in cells:
            row_order.append(key)
            cells[key] = {}
        cells[key].setdefault(target, "-")
        present.add(target)
    columns = tuple(c for c in TABLE_COLUMNS if c in present) + tuple(sorted(present - set(TABLE_COLUMNS)))
    counted = [c for c in columns if c not in exclude]
    rows = []
    for key in row_order:
        row = cells[key]
        vals = [row.get(c, "-") for c in counted]
        avg = "-" if any(v == "-" for v in vals) else average_cells(vals)
        rows.append((key, row, avg))
    return ReportTable(columns, rows, exclude)


def reports_json(reports: Sequence[EvalReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n"
