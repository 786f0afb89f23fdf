"""Table-driven romanization for the Arabic, Devanagari and Ethiopic scripts."""

from __future__ import annotations

import functools
import string
import unicodedata
from collections import Counter
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable

from .corpus import Dataset, STRInstance

# Devanagari-style combining classes.
PLAIN, CONSONANT, VOWEL_SIGN, VIRAMA = "", "C", "V", "K"

_ALLOWED_OUTPUT = set(string.ascii_letters + string.digits + "' ") | set(string.punctuation)


@dataclass(frozen=True)
class Rule:
    output: str
    cls: str = PLAIN


@dataclass(frozen=True)
class ScriptTable:
    script: str
    rules: tuple[tuple[str, Rule], ...]
    inherent_vowel: str = ""

    def __post_init__(self):
        for src, rule in self.rules:
            if not src:
                raise ValueError(f"{self.script}: empty source sequence")
            bad = set(rule.output) - _ALLOWED_OUTPUT
            if bad:
                raise ValueError(f"{self.script}: rule {src!r} emits non-ASCII {sorted(bad)}")
            if rule.cls not in (PLAIN, CONSONANT, VOWEL_SIGN, VIRAMA):
                raise ValueError(f"{self.script}: unknown rule class {rule.cls!r}")

    @property
    def coverage(self) -> frozenset[str]:
        return frozenset(ch for src, _ in self.rules for ch in src)


def parse_table(text: str, script: str | None = None) -> ScriptTable:
    """Parse ``source<TAB>latin[<TAB>class]`` lines; ``#`` starts a comment,
    ``#!key=value`` sets a table property."""
    props = {}
    rules: dict[str, Rule] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#!"):
            key, _, value = line[2:].partition("=")
            props[key.strip()] = value.strip()
            continue
        if not line.strip() or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) < 2 or len(cells) > 3:
            raise ValueError(f"line {lineno}: expected 2 or 3 tab-separated fields")
        src = cells[0]
        rule = Rule(cells[1], cells[2].strip() if len(cells) == 3 else PLAIN)
        if src in rules and rules[src] != rule:
            raise ValueError(f"line {lineno}: conflicting rule for {src!r}")
        rules[src] = rule
    name = script or props.get("script")
    if not name:
        raise ValueError("table has no script name")
    return ScriptTable(name, tuple(sorted(rules.items())), props.get("inherent", ""))


def load_table(path: "str | Path") -> ScriptTable:
    return parse_table(Path(path).read_text(encoding="utf-8"))


@functools.lru_cache(maxsize=None)
def default_tables() -> tuple[ScriptTable, ...]:
    base = resources.files("xlstr") / "data" / "translit"
    return tuple(parse_table((base / f"{name}.tsv").read_text(encoding="utf-8"))
                 for name in ("arabic", "devanagari", "ethiopic"))


@dataclass(frozen=True)
class _Compiled:
    rules: dict
    maxlen: int
    coverage: frozenset


@functools.lru_cache(maxsize=32)
def _compile(tables: tuple[ScriptTable, ...]) -> _Compiled:
    merged: dict[str, tuple[Rule, str]] = {}
    # canonical order: result must not depend on how tables were passed in
    for table in sorted(tables, key=lambda t: t.script):
        for src, rule in table.rules:
            prev = merged.get(src)
            if prev is not None and prev[0] != rule:
                raise ValueError(f"{src!r} mapped differently by {prev[1]} and {table.script}")
            merged[src] = (rule, table.inherent_vowel)
    coverage = frozenset(ch for src in merged for ch in src)
    if any(ord(ch) < 128 for ch in coverage):
        # outputs are ASCII, so covering ASCII would break idempotence
        raise ValueError("romanization tables may not rewrite ASCII characters")
    return _Compiled(merged, max((len(s) for s in merged), default=1), coverage)


def covered_characters(tables: Iterable[ScriptTable] | None = None) -> frozenset[str]:
    return _compile(_as_tuple(tables)).coverage


def _as_tuple(tables) -> tuple[ScriptTable, ...]:
    if tables is None:
        return default_tables()
    if isinstance(tables, ScriptTable):
        return (tables,)
    return tuple(tables)


def _is_latin_or_neutral(ch: str) -> bool:
    if ord(ch) < 128:
        return True
    cat = unicodedata.category(ch)
    if cat[0] not in "LM":
        return True
    return "LATIN" in unicodedata.name(ch, "")


def romanize(text: str, tables: Iterable[ScriptTable] | ScriptTable | None = None,
             diagnostics: Counter | None = None) -> str:
    """Rewrite every covered character of ``text`` in Latin script.

    Longest match wins. Uncovered characters pass through; non-Latin ones are
    counted in ``diagnostics`` when a Counter is supplied.
    """
    comp = _compile(_as_tuple(tables))
    rules, maxlen = comp.rules, comp.maxlen
    tokens: list[tuple[str, str, str]] = []  # (output, class, inherent vowel)
    i, n = 0, len(text)
    while i < n:
        for L in range(min(maxlen, n - i), 0, -1):
            hit = rules.get(text[i:i + L])
            if hit is not None:
                rule, inherent = hit
                tokens.append((rule.output, rule.cls, inherent))
                i += L
                break
        else:
            ch = text[i]
            if diagnostics is not None and not _is_latin_or_neutral(ch):
                diagnostics[ch] += 1
            tokens.append((ch, PLAIN, ""))
            i += 1

    out = []
    j = 0
    while j < len(tokens):
        text_, cls, inherent = tokens[j]
        if cls == CONSONANT:
            nxt = tokens[j + 1][1] if j + 1 < len(tokens) else None
            if nxt == VOWEL_SIGN:
                out.append(text_ + tokens[j + 1][0])
                j += 2
                continue
            if nxt == VIRAMA:
                out.append(text_)
                j += 2
                continue
            out.append(text_ + inherent)
        else:
            out.append(text_)
        j += 1
    return "".join(out)


def romanize_instance(inst: STRInstance, tables=None) -> STRInstance:
    s1, s2 = romanize(inst.sent1, tables), romanize(inst.sent2, tables)
    if s1 == inst.sent1 and s2 == inst.sent2:
        return inst
    return replace(inst, sent1=s1, sent2=s2)


def romanize_dataset(ds: Dataset, tables=None) -> Dataset:
    return Dataset(ds.lang, ds.split, tuple(romanize_instance(i, tables) for i in ds.instances))
