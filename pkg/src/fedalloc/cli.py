"""Command-line entry point: ``fedalloc run | oracle-check | report``."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import load_config
from .errors import ConfigError
from .optimizer import METHODS


def _methods(text: str) -> tuple[str, ...]:
    items = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in items if m not in METHODS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    return items


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedalloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the methods on seeded scenarios and write CSVs")
    run.add_argument("--config", required=True, help="YAML scenario file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds, from the config seed")
    run.add_argument("--methods", type=_methods, default=None,
                     help="comma-separated subset of " + ",".join(METHODS))
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--no-sweep", action="store_true", help="skip the dataset-size sweep")

    oc = sub.add_parser("oracle-check", help="compare the solvers with brute-force grid references")
    oc.add_argument("--quick", action="store_true", help="fewer fixtures")

    rep = sub.add_parser("report", help="summarize a run directory")
    rep.add_argument("--in", dest="in_dir", required=True, help="directory written by 'run'")
    return parser


def _cmd_run(args) -> int:
    from .suite import format_report, run_suite
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.methods:
        config = replace(config, methods=args.methods)
    if args.seeds < 1:
        print("error: --seeds must be at least 1", file=sys.stderr)
        return 2
    records, _ = run_suite(config, args.out, args.seeds, max(1, args.jobs), not args.no_sweep)
    print(format_report(records))
    print(f"wrote {os.path.join(args.out, '')}{{convergence,comparison,energy_sweep}}.csv")
    return 0


def _cmd_oracle(args) -> int:
    from .verify import run_all
    results = run_all(quick=args.quick)
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


def _cmd_report(args) -> int:
    from .suite import format_report, load_records
    try:
        records = load_records(args.in_dir)
    except FileNotFoundError:
        print(f"error: no records.json in {args.in_dir}", file=sys.stderr)
        return 2
    print(format_report(records))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "oracle-check": _cmd_oracle, "report": _cmd_report}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
