"""Command-line entry points: run, landscape, analyze, schedule."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import experiment
from .benchmarks import FUNCTION_NAMES
from .topology import removal_schedule

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class ConfigError(Exception):
    pass


def cmd_run(args) -> int:
    try:
        plan = experiment.ExperimentPlan.load(args.plan)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid plan {args.plan}: {exc}") from exc
    path = experiment.run_plan(plan, out_dir=args.output, trace=args.trace)
    print(path)
    return EXIT_OK


def _split_names(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if names == ["all"]:
        return list(FUNCTION_NAMES)
    unknown = [n for n in names if n not in FUNCTION_NAMES]
    if unknown:
        raise ConfigError(f"unknown function(s): {', '.join(unknown)}")
    return names


def cmd_landscape(args) -> int:
    names = _split_names(args.functions)
    try:
        dims = [int(d) for d in args.dims.split(",") if d.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad dimension list {args.dims!r}") from exc
    if args.runs < 1:
        raise ConfigError("runs must be >= 1")
    try:
        rows = experiment.landscape_rows(names, dims, args.runs, args.seed, args.pic)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    experiment.write_metrics(args.output, rows, args.runs)
    print(args.output)
    return EXIT_OK


def cmd_analyze(args) -> int:
    for p in (args.results, args.metrics):
        if not Path(p).exists():
            raise ConfigError(f"missing input {p}")
    try:
        experiment.analyze(args.results, args.metrics, args.output)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc
    print(args.output)
    return EXIT_OK


def cmd_schedule(args) -> int:
    try:
        sched = removal_schedule(args.n, args.alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    sys.stdout.write(experiment.SCHEMA_LINE + "\n" + sched.to_csv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyntopo", description="COHDA topology experiments")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute an experiment plan")
    r.add_argument("plan", help="plan JSON file")
    r.add_argument("--output", help="output directory (default: the plan's)")
    r.add_argument("--trace", action="store_true", help="write one JSON-lines trace per run")
    r.set_defaults(func=cmd_run)

    la = sub.add_parser("landscape", help="compute landscape metrics")
    la.add_argument("--functions", default="all", help="comma-separated names or 'all'")
    la.add_argument("--dims", default="50,100")
    la.add_argument("--runs", type=int, default=30)
    la.add_argument("--seed", type=int, default=0)
    la.add_argument("--pic", choices=("zero", "sweep"), default="zero")
    la.add_argument("--output", default="metrics.csv")
    la.set_defaults(func=cmd_landscape)

    an = sub.add_parser("analyze", help="summaries, labels and decision trees")
    an.add_argument("results")
    an.add_argument("metrics")
    an.add_argument("--output", default="analysis")
    an.set_defaults(func=cmd_analyze)

    s = sub.add_parser("schedule", help="print an edge-removal schedule")
    s.add_argument("n", type=int)
    s.add_argument("alpha", type=float)
    s.set_defaults(func=cmd_schedule)

    sub.add_parser("plans", help="print the built-in desk plan as JSON").set_defaults(func=cmd_plans)
    return p


def cmd_plans(args) -> int:
    plan = experiment.desk_plan()
    print(json.dumps(experiment.plan_to_dict(plan), indent=2))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure mid-run is a runtime error
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
