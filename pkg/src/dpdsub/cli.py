"""Command line front end.

Subcommands: ``run`` executes a config and writes the CSV trace;
``report`` does the same and renders figures next to the CSV; ``validate``
checks a config's graph and schedule assumptions without running;
``oracle`` prints the reference solution of a named problem.

Exit codes: 0 success, 1 a run or validation failed, 2 the command line or
config file itself is unusable.
"""

import argparse
import dataclasses
import sys

import numpy as np

from .baselines import reference_solve
from .harness import emit_csv, load_config, run_experiment, validate_experiment
from .problems import build_named_problem


def _vec(v):
    return " ".join(format(float(t), ".12g") for t in np.atleast_1d(v))


def _default_out(config):
    token = config.problem.replace(":", "_").replace("/", "_")
    return f"{config.algorithm}_{token}_trace.csv"


def _apply_overrides(config, args):
    updates = {}
    for key in ("out", "rounds", "seed", "record_every"):
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    if getattr(args, "debug_asserts", False):
        updates["debug_asserts"] = True
    if getattr(args, "figures", False):
        updates["figures"] = True
    return dataclasses.replace(config, **updates) if updates else config


def _add_run_options(sub):
    sub.add_argument("config", help="path to a key=value config file")
    sub.add_argument("--out", help="CSV output path")
    sub.add_argument("--rounds", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--record-every", type=int, dest="record_every")
    sub.add_argument("--debug-asserts", action="store_true", dest="debug_asserts")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dpdsub",
        description="distributed primal-dual subgradient experiments",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="execute a config and write its CSV trace")
    _add_run_options(run)
    run.add_argument("--figures", action="store_true",
                     help="also render figures next to the CSV")

    report = subs.add_parser("report",
                             help="execute a config, write CSV and figures")
    _add_run_options(report)

    val = subs.add_parser("validate",
                          help="check a config's assumptions without running")
    val.add_argument("config")

    oracle = subs.add_parser("oracle",
                             help="print the reference solution of a problem")
    oracle.add_argument("problem")
    oracle.add_argument("--resolution", type=float, default=0.05)
    oracle.add_argument("--refinements", type=int, default=2)
    oracle.add_argument("--no-price", action="store_true", dest="no_price")
    return parser


def _load(path):
    try:
        return load_config(path)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        raise SystemExit(2)
    except ValueError as exc:
        print(exc, file=sys.stderr)
        raise SystemExit(2)


def _cmd_run(args, with_figures):
    config = _apply_overrides(_load(args.config), args)
    try:
        result = run_experiment(config)
    except (ValueError, RuntimeError, AssertionError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    out = config.out or _default_out(config)
    emit_csv(result.trace, result.problem, out)
    for line in _summary(result):
        print(line)
    print(f"trace written to {out}")
    if with_figures or config.figures:
        from .figures import render_figures
        stem = out[:-4] if out.endswith(".csv") else out
        for path in render_figures(result.trace, result.problem, stem):
            print(f"figure written to {path}")
    return 0


def _summary(result):
    from .harness import summary_lines
    return summary_lines(result)


def _cmd_validate(args):
    config = _load(args.config)
    try:
        result = validate_experiment(config)
    except ValueError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 1
    for line in result.validation_lines():
        print(line)
    return 0 if result.ok else 1


def _cmd_oracle(args):
    try:
        problem = build_named_problem(args.problem)
        ref = reference_solve(problem, args.resolution,
                              refinements=args.refinements,
                              with_price=not args.no_price)
    except ValueError as exc:
        print(f"oracle failed: {exc}", file=sys.stderr)
        return 1
    print(f"problem {problem.name}")
    print(f"method {ref.method}")
    print(f"x {_vec(ref.x)}")
    print(f"value {format(ref.value, '.12g')}")
    if ref.mu is not None:
        print(f"price {_vec(ref.mu)}")
    if ref.nu is not None:
        print(f"equality multiplier {_vec(ref.nu)}")
    if ref.spacing is not None:
        print(f"grid spacing {format(ref.spacing, '.3g')}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args, with_figures=False)
    if args.command == "report":
        return _cmd_run(args, with_figures=True)
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_oracle(args)
