"""Experiment configs and the assemble -> augment -> romanize -> train -> evaluate pipeline."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import (
    AssemblyStrategy,
    Dataset,
    Split,
    TrainSet,
    assemble,
    load_corpus,
    select_sources,
    train_sets,
    write_trainset,
)
from .errors import ConfigError, MissingDataset, StageError, XlstrError
from .evaluation import DEFAULT_AVG_EXCLUDE, EvalReport, ReportTable, evaluate, report_table
from .langsim import TARGET_LANGUAGES, check_language
from .scorer import TrainConfig, TrainResult, featurize, format_trace, save_checkpoint, train

log = logging.getLogger(__name__)

# Targets whose test labels are withheld; they are scored on dev instead.
DEV_EVAL_TARGETS = frozenset({"esp"})
DEV_SOURCES = ("source", "target")

_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _parse_bool(key, value):
    try:
        return _BOOL[value.strip().lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected true/false, got {value!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    target: str
    strategy: AssemblyStrategy
    translator: str = "identity"
    train: TrainConfig = field(default_factory=TrainConfig)
    data_root: str | None = None  # None: bundled mini-corpus
    seed: int = 0
    dev: str = "source"

    def __post_init__(self):
        check_language(self.target)
        if self.dev not in DEV_SOURCES:
            raise ConfigError(f"dev must be one of {DEV_SOURCES}, got {self.dev!r}")
        if self.train.seed != self.seed:
            object.__setattr__(self, "train", replace(self.train, seed=self.seed))

    @property
    def feature(self):
        return self.strategy.feature

    @property
    def k(self):
        return self.strategy.k

    def serialize(self) -> str:
        s = self.strategy
        items = [
            ("target", self.target),
            ("strategy", s.kind.value),
            ("k", "" if s.k is None else str(s.k)),
            ("feature", "" if s.feature is None else s.feature.value),
            ("augment", str(s.augment).lower()),
            ("romanize", str(s.romanize).lower()),
            ("translator", self.translator),
            ("data_root", self.data_root or ""),
            ("seed", str(self.seed)),
            ("dev", self.dev),
        ]
        for f in fields(TrainConfig):
            if f.name != "seed":
                items.append((f"train.{f.name}", repr(getattr(self.train, f.name))
                              if isinstance(getattr(self.train, f.name), float)
                              else str(getattr(self.train, f.name))))
        return "".join(f"{k}={v}\n" for k, v in items)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()[:12]

    @property
    def label(self) -> str:
        return self.strategy.descriptor

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        return cls.from_mapping(parse_kv(text))

    @classmethod
    def from_mapping(cls, kv: Mapping[str, str]) -> "ExperimentConfig":
        kv = dict(kv)
        known = {"target", "strategy", "k", "feature", "augment", "romanize", "translator",
                 "data_root", "seed", "dev"} | {f"train.{f.name}" for f in fields(TrainConfig)}
        unknown = sorted(set(kv) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "target" not in kv or "strategy" not in kv:
            raise ConfigError("config needs target and strategy")
        try:
            k = int(kv["k"]) if kv.get("k") else None
            seed = int(kv.get("seed") or 0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        strategy = AssemblyStrategy(kv["strategy"], k, kv.get("feature") or None,
                                    _parse_bool("augment", kv.get("augment", "false")),
                                    _parse_bool("romanize", kv.get("romanize", "false")))
        tkw = {}
        for f in fields(TrainConfig):
            raw = kv.get(f"train.{f.name}")
            if raw is None or f.name == "seed":
                continue
            default = getattr(TrainConfig(), f.name)
            try:
                tkw[f.name] = type(default)(raw) if not isinstance(default, str) else raw
            except ValueError:
                raise ConfigError(f"train.{f.name}: bad value {raw!r}") from None
        try:
            tcfg = TrainConfig(seed=seed, **tkw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cls(kv["target"], strategy, kv.get("translator") or "identity", tcfg,
                   kv.get("data_root") or None, seed, kv.get("dev") or "source")


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value")
        key = key.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def load_config(path: "str | Path") -> ExperimentConfig:
    return ExperimentConfig.parse(Path(path).read_text(encoding="utf-8"))


def expand_configs(text: str) -> list[ExperimentConfig]:
    """Parse a config whose ``target`` may be ``*`` or a comma list into one config per target."""
    kv = parse_kv(text)
    raw = kv.get("target", "")
    targets = TARGET_LANGUAGES if raw == "*" else [t.strip() for t in raw.split(",") if t.strip()]
    return [ExperimentConfig.from_mapping({**kv, "target": t}) for t in targets]


def load_suite(path: "str | Path") -> list[ExperimentConfig]:
    """A directory of ``*.cfg`` files (name order) or a single config file."""
    path = Path(path)
    files = sorted(path.glob("*.cfg")) if path.is_dir() else [path]
    if path.is_dir() and not files:
        raise ConfigError(f"{path}: no .cfg files")
    out = []
    for f in files:
        out.extend(expand_configs(f.read_text(encoding="utf-8")))
    return out


# --- corpus access ----------------------------------------------------------

_CORPUS_CACHE: dict[str, dict] = {}
_CORPUS_LOCK = threading.Lock()


def resolve_data_root(data_root: str | None) -> Path:
    if data_root:
        return Path(data_root)
    env = os.environ.get("XLSTR_DATA_ROOT")
    if env:
        return Path(env)
    from .synthetic import minicorpus_root
    return minicorpus_root()


def corpus_for(data_root: str | None) -> dict[tuple[str, Split], Dataset]:
    root = resolve_data_root(data_root).resolve()
    key = str(root)
    with _CORPUS_LOCK:
        if key not in _CORPUS_CACHE:
            if not root.is_dir():
                raise MissingDataset(f"data root {root} does not exist")
            _CORPUS_CACHE[key] = load_corpus(root)
        return _CORPUS_CACHE[key]


def evaluation_split(target: str, corpus: Mapping[tuple[str, Split], Dataset],
                     warnings: list[str] | None = None) -> Dataset:
    test = corpus.get((target, Split.TEST))
    if target not in DEV_EVAL_TARGETS and test is not None and test.labeled:
        return test
    dev = corpus.get((target, Split.DEV))
    if dev is None:
        raise MissingDataset(f"no labeled evaluation data for {target}")
    if target not in DEV_EVAL_TARGETS and warnings is not None:
        warnings.append(f"{target}: no labeled test split, evaluating on dev")
    return dev


# --- pipeline -----------------------------------------------------------------

@dataclass
class ExperimentResult:
    config: ExperimentConfig
    report: EvalReport
    trainset: TrainSet
    training: TrainResult
    artifacts: Path | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = self.report.to_dict()
        d["config_hash"] = self.config.config_hash
        return d


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError) and isinstance(exc, Exception):
            raise StageError(self.name, exc) from exc
        return False


def _maybe_romanize(ds: Dataset, on: bool) -> Dataset:
    if not on:
        return ds
    from .translit import romanize_dataset
    return romanize_dataset(ds)


def run_experiment(cfg: ExperimentConfig, out: "str | Path | None" = None) -> ExperimentResult:
    """Run one experiment; with ``out``, write artifacts to ``<out>/<target>-<hash>/``.

    Artifacts are written to a ``.partial`` directory first and moved into
    place only on success; a failed run leaves ``.partial`` with an error.txt.
    """
    h = cfg.config_hash
    final = partial = None
    if out is not None:
        final = Path(out) / f"{cfg.target}-{h}"
        partial = final.with_name(final.name + ".partial")
        if partial.exists():
            shutil.rmtree(partial)
        partial.mkdir(parents=True)
        (partial / "config.txt").write_text(f"# config_hash={h}\n" + cfg.serialize(), encoding="utf-8")
    warnings: list[str] = []
    try:
        with _Stage("load"):
            corpus = corpus_for(cfg.data_root)
            trains = train_sets(corpus)
        with _Stage("select"):
            select_sources(cfg.strategy, cfg.target, trains.keys())
        with _Stage("assemble"):
            translator = None
            if cfg.strategy.augment:
                from .augment import make_translator
                translator = make_translator(cfg.translator)
            ts = assemble(cfg.strategy, cfg.target, trains, translator=translator)
            if partial is not None:
                write_trainset(ts, partial / "trainset.tsv", h)
        with _Stage("train"):
            if cfg.dev == "target":
                devs = [corpus[(cfg.target, Split.DEV)]] if (cfg.target, Split.DEV) in corpus else []
            else:
                devs = [corpus[(s, Split.DEV)] for s in ts.sources if (s, Split.DEV) in corpus]
            if not devs:
                raise MissingDataset(f"no dev data for {cfg.dev} languages of {cfg.target}")
            dev_inst = [i for d in devs for i in _maybe_romanize(d, cfg.strategy.romanize).instances]
            res = train(featurize(ts.instances), [i.score for i in ts.instances],
                        featurize(dev_inst), [i.score for i in dev_inst], cfg.train)
            if partial is not None:
                save_checkpoint(res.params, partial / "scorer.ckpt", h)
                (partial / "trace.tsv").write_text(f"# config_hash={h}\n" + format_trace(res.trace),
                                                   encoding="utf-8")
        with _Stage("evaluate"):
            eval_ds = _maybe_romanize(evaluation_split(cfg.target, corpus, warnings), cfg.strategy.romanize)
            report = evaluate(res.params, eval_ds, cfg.label,
                              {"augmented": cfg.strategy.augment, "romanized": cfg.strategy.romanize},
                              cfg.seed)
        result = ExperimentResult(cfg, report, ts, res, None, warnings)
        for w in warnings:
            log.warning(w)
        if partial is not None:
            (partial / "report.json").write_text(
                json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
            if final.exists():
                shutil.rmtree(final)
            partial.rename(final)
            result.artifacts = final
        return result
    except StageError as exc:
        if partial is not None:
            (partial / "error.txt").write_text(str(exc) + "\n", encoding="utf-8")
        raise


# --- suites -----------------------------------------------------------------

@dataclass
class SuiteResult:
    results: list[ExperimentResult]
    failures: list[tuple[ExperimentConfig, StageError]]
    table: ReportTable

    @property
    def reports(self) -> list[EvalReport]:
        return [r.report for r in self.results]

    def to_dict(self) -> dict:
        return {
            "reports": [r.to_dict() for r in self.results],
            "failures": [{"target": c.target, "strategy": c.label, "config_hash": c.config_hash,
                          "stage": e.stage, "error": str(e)} for c, e in self.failures],
            "table": self.table.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render(self) -> str:
        text = self.table.render()
        if self.failures:
            text += "\nErrors:\n"
            text += "".join(f"  {c.label} / {c.target}: {e}\n" for c, e in self.failures)
        return text


def run_suite(configs: Sequence[ExperimentConfig], out: "str | Path | None" = None, jobs: int = 1,
              avg_exclude: Iterable[str] = DEFAULT_AVG_EXCLUDE) -> SuiteResult:
    """Run every config; failures become "-" cells plus an error appendix.

    Results are collected in config order, so the output does not depend on
    ``jobs`` or on completion order.
    """
    outcomes: list = [None] * len(configs)

    def one(i):
        try:
            outcomes[i] = run_experiment(configs[i], out)
        except StageError as exc:
            outcomes[i] = exc
        except XlstrError as exc:
            outcomes[i] = StageError("setup", exc)

    if jobs > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(one, range(len(configs))))
    else:
        for i in range(len(configs)):
            one(i)
    results = [o for o in outcomes if isinstance(o, ExperimentResult)]
    failures = [(c, o) for c, o in zip(configs, outcomes) if isinstance(o, StageError)]
    table = report_table([r.report for r in results], avg_exclude,
                         [(c.label, c.target) for c, _ in failures])
    return SuiteResult(results, failures, table)
