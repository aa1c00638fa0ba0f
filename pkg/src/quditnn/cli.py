"""Command-line experiment runner.

Subcommands:
  train            fit one model kind per seed, saving models and histories
  evaluate         score previously saved models on the dataset's test split
  poison-study     corrupt features per seed, train, and score F1 + WIS
  report           merge metrics reports into a comparison table
  convert-dataset  rewrite a two-header-row spreadsheet export as canonical CSV
  check-algebra    verify the generator construction for a list of dimensions

Exit status is 0 only when every requested seed completed; partial failures
are listed on stderr and recorded in the report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .data import convert_uci_export
from .errors import QuditError
from .experiments import (
    ExperimentConfig,
    comparison_rows,
    load_experiment_config,
    load_report,
    parse_seed_list,
    run_evaluate_saved,
    run_experiment,
    run_train_only,
    write_comparison,
    write_report,
)
from .generators import build_generators, check_algebra

OUT_DIR_ENV = "QUDITNN_OUT_DIR"


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or ./runs)")
    parser.add_argument("--seed-list", help="comma-separated seeds overriding the config")
    parser.add_argument("--model", choices=("qnn", "logreg", "mlp"))
    parser.add_argument("--readout", choices=("parity", "first-two"))
    parser.add_argument("--importance-mode", choices=("sum", "mean-abs"))
    parser.add_argument("--poison-mode", choices=("train-and-test", "test-only"))


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    config = load_experiment_config(args.config)
    out = args.out or config.out_dir or os.environ.get(OUT_DIR_ENV) or "runs"
    updates: dict = {"out_dir": out}
    if args.seed_list:
        updates["seeds"] = parse_seed_list(args.seed_list)
    if args.model:
        updates["model"] = args.model
    if args.importance_mode:
        updates["importance_mode"] = args.importance_mode
    if args.poison_mode:
        updates["poison_mode"] = args.poison_mode
    config = replace(config, **updates)
    if args.readout:
        config = replace(config, train=replace(config.train, readout=args.readout))
    return config


def _report_failures(report: dict) -> int:
    failures = report.get("failures", ())
    for failure in failures:
        print(f"seed {failure['seed']} failed: {failure['error']}", file=sys.stderr)
    return 1 if failures else 0


def _cmd_train(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    manifest = run_train_only(config)
    done = len(manifest["models"])
    print(f"trained {done}/{len(config.seeds)} seeds into {config.out_dir}")
    return _report_failures(manifest)


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    report = run_evaluate_saved(config, config.out_dir)
    path = Path(config.out_dir) / "report.json"
    write_report(report, path)
    _print_summary(report, path)
    return _report_failures(report)


def _cmd_poison_study(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    if config.poison_count == 0:
        config = replace(config, poison_count=7)
    report = run_experiment(config)
    path = Path(config.out_dir) / "report.json"
    write_report(report, path)
    _print_summary(report, path)
    return _report_failures(report)


def _cmd_run(args: argparse.Namespace) -> int:
    # train + evaluate in one pass; the spelled-out pipeline behind `train`
    # followed by `evaluate` for users who want a single command.
    config = _resolve_config(args)
    report = run_experiment(config)
    path = Path(config.out_dir) / "report.json"
    write_report(report, path)
    _print_summary(report, path)
    return _report_failures(report)


def _print_summary(report: dict, path: Path) -> None:
    agg = report["aggregate"]
    bits = [f"model={report['model']}", f"seeds={len(report['per_seed'])}"]
    for key in ("macro_f1", "edit_distance_vs_logreg", "wis"):
        if key in agg:
            bits.append(f"{key}={agg[key]['mean']:.4f}+/-{agg[key]['std']:.4f}")
    print("  ".join(bits))
    print(f"report written to {path}")


def _cmd_report(args: argparse.Namespace) -> int:
    reports = [load_report(p) for p in args.reports]
    rows = comparison_rows(reports)
    out = args.out or os.environ.get(OUT_DIR_ENV) or "runs"
    paths = write_comparison(rows, out, reports[0]["dataset"])
    sys.stdout.write(Path(paths["txt"]).read_text())
    print(f"comparison written to {paths['json']}")
    return 0


def _cmd_convert_dataset(args: argparse.Namespace) -> int:
    rows = convert_uci_export(args.src, args.dst)
    print(f"wrote {rows} rows to {args.dst}")
    return 0


def _cmd_check_algebra(args: argparse.Namespace) -> int:
    worst = 0.0
    for dim in args.dims:
        report = check_algebra(build_generators(dim))
        print(json.dumps(report.as_dict()))
        worst = max(worst, report.max_abs_trace, report.max_offdiagonal_overlap,
                    report.max_normalization_deviation)
    status = "ok" if worst < 1e-12 else "DEVIATION"
    print(f"max deviation {worst:.3e} ({status})", file=sys.stderr)
    return 0 if worst < 1e-12 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quditnn",
        description="Single-qudit classifier experiments with classical baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, handler, doc in (
        ("train", _cmd_train, "fit one model per seed and save the artifacts"),
        ("evaluate", _cmd_evaluate, "score saved models on the test split"),
        ("poison-study", _cmd_poison_study, "feature-corruption study (trains inline)"),
        ("run", _cmd_run, "train and evaluate in one pass"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_common_flags(p)
        p.set_defaults(handler=handler)

    p = sub.add_parser("report", help="merge metrics reports into a comparison table")
    p.add_argument("reports", nargs="+", help="report.json files to merge")
    p.add_argument("--out", help="directory for comparison files")
    p.set_defaults(handler=_cmd_report)

    p = sub.add_parser("convert-dataset", help="rewrite a spreadsheet export as canonical CSV")
    p.add_argument("src")
    p.add_argument("dst")
    p.set_defaults(handler=_cmd_convert_dataset)

    p = sub.add_parser("check-algebra", help="verify generator orthogonality per dimension")
    p.add_argument("dims", nargs="*", type=int, default=[2, 3, 4, 5, 6, 7, 8])
    p.set_defaults(handler=_cmd_check_algebra)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except QuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
