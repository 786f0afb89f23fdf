"""Command-line entry point: ``xlstr <command> ...``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 stage or
computation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from pathlib import Path

from .errors import XlstrError

log = logging.getLogger("xlstr")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--data-root", default=argparse.SUPPRESS,
                   help="corpus directory (default: $XLSTR_DATA_ROOT or the bundled mini-corpus)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS, help="output path or directory")
    p.add_argument("--format", choices=("table", "json"), default=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def _strategy_args(p):
    p.add_argument("--strategy", required=True,
                   help="english-only | ms-all | ms-fam | knn+eng | knn")
    p.add_argument("--k", type=int)
    p.add_argument("--feature", help="CellState or L2V-{LRN,Pho,Syn,Inv,Fam,Geo}")
    p.add_argument("--augment", action="store_true", help="cross-translate the donors")
    p.add_argument("--romanize", action="store_true")
    p.add_argument("--translator", default="identity",
                   help="identity | dictionary | dictionary:<path> | cmd:<command>")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="xlstr", description="Cross-lingual semantic textual relatedness toolkit.",
                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("stats", parents=[common], help="instance counts per language and split")

    p = sub.add_parser("similarity", parents=[common], help="print a bundled similarity matrix")
    p.add_argument("feature")

    p = sub.add_parser("select", parents=[common], help="donor languages for a target")
    p.add_argument("target")
    _strategy_args(p)

    p = sub.add_parser("assemble", parents=[common], help="build a training set for a target")
    p.add_argument("target")
    _strategy_args(p)

    p = sub.add_parser("translit", parents=[common], help="romanize text")
    p.add_argument("text", nargs="*", help="text to romanize (default: stdin)")
    p.add_argument("--input", help="file to romanize")

    p = sub.add_parser("augment", parents=[common], help="cross-translate training sets")
    p.add_argument("langs", help="comma-separated languages")
    p.add_argument("--translator", default="identity")

    p = sub.add_parser("train", parents=[common], help="train the lexical scorer")
    p.add_argument("--train", required=True, dest="train_path")
    p.add_argument("--dev", required=True, dest="dev_path")
    p.add_argument("--lang", default="eng", help="language tag for the input files")
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--optimizer", choices=("sgd", "adamw"))

    p = sub.add_parser("evaluate", parents=[common], help="score a labeled file with a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("data")
    p.add_argument("--lang", default="eng")
    p.add_argument("--split", default="test")

    p = sub.add_parser("run", parents=[common], help="run one experiment config")
    p.add_argument("config")

    p = sub.add_parser("suite", parents=[common], help="run a directory of experiment configs")
    p.add_argument("config_dir")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--avg-exclude", default="eng",
                   help="comma-separated targets left out of avg ('l2v' for the L2V-uncovered set)")
    p.add_argument("--json-out", help="also write the combined JSON here")
    return parser


def _emit(args, table: str, payload) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    else:
        text = table if table.endswith("\n") else table + "\n"
    sys.stdout.write(text)


def _strategy(args):
    from .corpus import AssemblyStrategy
    return AssemblyStrategy(args.strategy, args.k, args.feature, args.augment, args.romanize)


def _corpus(args):
    from .experiment import corpus_for
    return corpus_for(args.data_root)


def cmd_stats(args):
    from .corpus import stats
    st = stats(_corpus(args).values())
    _emit(args, st.render(), st.to_dict())


def cmd_similarity(args):
    from .langsim import format_matrix, load_similarity_matrix
    m = load_similarity_matrix(args.feature)
    payload = {"feature": m.feature.value, "sources": list(m.rows), "targets": list(m.cols),
               "values": [list(r) for r in m.values]}
    _emit(args, format_matrix(m), payload)


def cmd_select(args):
    from .corpus import select_sources
    from .langsim import TRAIN_LANGUAGES, check_language
    check_language(args.target)
    diag: list[str] = []
    srcs = select_sources(_strategy(args), args.target, TRAIN_LANGUAGES, diagnostics=diag)
    for d in diag:
        log.info(d)
    _emit(args, " ".join(srcs), {"target": args.target, "sources": srcs})


def cmd_assemble(args):
    from .corpus import assemble, serialize_pairs, train_sets, write_trainset
    translator = None
    strategy = _strategy(args)
    if strategy.augment:
        from .augment import make_translator
        translator = make_translator(args.translator)
    ts = assemble(strategy, args.target, train_sets(_corpus(args)), translator=translator)
    if args.out:
        write_trainset(ts, args.out)
    side = ts.sidecar()
    summary = (f"{ts.target}: {side['descriptor']} sources={','.join(ts.sources)} n={len(ts)}\n"
               + "".join(f"  {k}: {v}\n" for k, v in side["language_counts"].items()))
    if args.out is None and args.format != "json":
        summary = serialize_pairs(ts.instances)
    _emit(args, summary, side)


def cmd_translit(args):
    from .translit import romanize
    if args.input:
        text = Path(args.input).read_text(encoding="utf-8")
    elif args.text:
        text = " ".join(args.text)
    else:
        text = sys.stdin.read()
    diag: Counter = Counter()
    out = romanize(text, diagnostics=diag)
    if diag:
        log.warning("uncovered characters: %s",
                    " ".join(f"U+{ord(c):04X}x{n}" for c, n in sorted(diag.items())))
    _emit(args, out.rstrip("\n"), {"input": text, "output": out,
                                    "uncovered": {f"U+{ord(c):04X}": n for c, n in sorted(diag.items())}})


def cmd_augment(args):
    from .augment import cross_translate, make_translator
    from .corpus import serialize_pairs, train_sets
    from .errors import MissingDataset
    trains = train_sets(_corpus(args))
    langs = [s.strip() for s in args.langs.split(",") if s.strip()]
    missing = [l for l in langs if l not in trains]
    if missing:
        raise MissingDataset(f"no training data for {', '.join(missing)}")
    aug = cross_translate([trains[l] for l in langs], make_translator(args.translator))
    if args.out:
        Path(args.out).write_text(serialize_pairs(aug.instances), encoding="utf-8")
    flagged = aug.flagged()
    table = f"n={len(aug)} " + " ".join(f"{k}={v}" for k, v in aug.balance().items())
    if flagged:
        table += f"\n{len(flagged)} translated pairs look identical but are labeled dissimilar"
    _emit(args, table, {"n": len(aug), "balance": aug.balance(), "flagged": len(flagged)})


def _read(path, lang, split):
    from .corpus import parse_dataset
    return parse_dataset(Path(path).read_bytes(), lang, split)


def cmd_train(args):
    from dataclasses import replace
    from .scorer import TrainConfig, format_trace, save_checkpoint, train_on
    cfg = TrainConfig(seed=args.seed)
    for name, val in (("learning_rate", args.lr), ("max_epochs", args.epochs), ("optimizer", args.optimizer)):
        if val is not None:
            cfg = replace(cfg, **{name: val})
    tr = _read(args.train_path, args.lang, "train")
    dv = _read(args.dev_path, args.lang, "dev")
    res = train_on(tr.instances, dv.instances, cfg)
    if args.out:
        ckpt = save_checkpoint(res.params, args.out)
        ckpt.with_suffix(".trace.tsv").write_text(format_trace(res.trace), encoding="utf-8")
    best = max((t.dev_rho for t in res.trace if t.dev_rho == t.dev_rho), default=float("nan"))
    _emit(args, format_trace(res.trace) + f"best dev rho {best:.4f} at step {res.best_step}",
          {"trace": [[t.step, t.loss, t.dev_rho] for t in res.trace], "best_step": res.best_step,
           "weights": res.params.weights.tolist(), "bias": res.params.bias})


def cmd_evaluate(args):
    from .evaluation import evaluate, format_cell
    from .scorer import load_checkpoint
    params = load_checkpoint(args.checkpoint)
    rep = evaluate(params, _read(args.data, args.lang, args.split), seed=args.seed)
    if args.out:
        Path(args.out).write_text(rep.to_json() + "\n", encoding="utf-8")
    _emit(args, f"{rep.target} {rep.split.value} n={rep.n} rho={format_cell(rep.rho)}", rep.to_dict())


def _with_overrides(cfg, args):
    from dataclasses import replace
    from .experiment import resolve_data_root
    changes = {}
    if args.data_root or cfg.data_root is None:
        # pin the corpus location so the config hash reflects it
        root = resolve_data_root(args.data_root or cfg.data_root)
        changes["data_root"] = str(root.resolve())
    if args.seed_given:
        changes["seed"] = args.seed
    return replace(cfg, **changes) if changes else cfg


def cmd_run(args):
    from .evaluation import format_cell
    from .experiment import load_config, run_experiment
    cfg = _with_overrides(load_config(args.config), args)
    res = run_experiment(cfg, args.out)
    r = res.report
    _emit(args, f"{r.target} {r.strategy} {r.split.value} n={r.n} rho={format_cell(r.rho)}"
          + (f"\nartifacts: {res.artifacts}" if res.artifacts else ""), res.to_dict())


def cmd_suite(args):
    from .evaluation import L2V_UNCOVERED
    from .experiment import load_suite, run_suite
    cfgs = [_with_overrides(c, args) for c in load_suite(args.config_dir)]
    excl = L2V_UNCOVERED if args.avg_exclude == "l2v" else \
        {s.strip() for s in args.avg_exclude.split(",") if s.strip()}
    res = run_suite(cfgs, args.out, args.jobs, excl)
    if args.json_out:
        Path(args.json_out).write_text(res.to_json(), encoding="utf-8")
    _emit(args, res.render(), res.to_dict())
    return 3 if res.failures else 0


COMMANDS = {
    "stats": cmd_stats, "similarity": cmd_similarity, "select": cmd_select,
    "assemble": cmd_assemble, "translit": cmd_translit, "augment": cmd_augment,
    "train": cmd_train, "evaluate": cmd_evaluate, "run": cmd_run, "suite": cmd_suite,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.seed_given = hasattr(args, "seed")
    for name, default in (("data_root", None), ("seed", 0), ("out", None), ("format", "table"),
                          ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.data_root is None and os.environ.get("XLSTR_DATA_ROOT"):
        args.data_root = os.environ["XLSTR_DATA_ROOT"]
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args) or 0
    except XlstrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
