"""Command-line front end.

Subcommands:
  run        execute one experiment config, write a metrics CSV
  compare    align several metrics CSVs into long-format data + SVG charts
  gradcheck  central-difference check of a config's model gradient
  linesearch brute-force scan of the step-size response at the initial point

Exit codes: 0 success, 2 config or usage error, 3 divergence.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import CONFIG_GRAMMAR, parse_config
from .errors import AutolrError, ContractViolation, DivergedProbeError, DivergenceError
from .harness import compare_runs, prepare_experiment, run_experiment
from .models import MlpModel
from .objective import Batch
from .probe import make_probe
from .verify import gradcheck, line_search_oracle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

KINK_MARGIN = 1e-4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autolr",
        description=__doc__,
        epilog=CONFIG_GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run",
        help="run one experiment from a config file",
        epilog=CONFIG_GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run_p.add_argument("--config", required=True, help="experiment config file")
    run_p.add_argument("--quiet", action="store_true", help="suppress progress lines")

    cmp_p = sub.add_parser("compare", help="compare two or more metrics CSVs")
    cmp_p.add_argument("metrics", nargs="+", help="metrics CSV files (need at least 2)")
    cmp_p.add_argument("--out", default="comparison", help="output directory (default: comparison)")

    gc_p = sub.add_parser("gradcheck", help="verify a config's model gradient numerically")
    gc_p.add_argument("--config", required=True, help="experiment config file")
    gc_p.add_argument("--h", type=float, default=1e-6, help="difference half-width (default 1e-6)")
    gc_p.add_argument("--trials", type=int, default=5, help="random (w, batch) draws (default 5)")

    ls_p = sub.add_parser("linesearch", help="scan f(eta) at the config's initial point")
    ls_p.add_argument("--config", required=True, help="experiment config file")
    ls_p.add_argument("--lo", type=float, required=True, help="grid lower bound")
    ls_p.add_argument("--hi", type=float, required=True, help="grid upper bound")
    ls_p.add_argument("--points", type=int, default=101, help="grid size (default 101)")
    return parser


def _cmd_run(args) -> int:
    config = parse_config(args.config)
    path = run_experiment(config, verbose=not args.quiet)
    print(path)
    return EXIT_OK


def _cmd_compare(args) -> int:
    if len(args.metrics) < 2:
        print("error: compare needs at least 2 metrics files", file=sys.stderr)
        return EXIT_CONFIG
    result = compare_runs(args.metrics, args.out)
    print(result.table)
    print(f"long-format data: {result.long_csv}")
    for chart in result.charts:
        print(f"chart: {chart}")
    return EXIT_OK


def _sample_point(objective, train, rng) -> tuple[np.ndarray, Batch]:
    """Random weights + batch, resampled away from ReLU kinks for MLPs."""
    for _ in range(100):
        w = objective.initial_params + 0.5 * rng.standard_normal(objective.param_count)
        rows = rng.choice(train.size, size=min(32, train.size), replace=False)
        batch = Batch(train.features[rows], train.targets[rows])
        if isinstance(objective, MlpModel):
            if objective.min_abs_preactivation(w, batch.features) < KINK_MARGIN:
                continue
        return w, batch
    raise ContractViolation("could not sample a point away from activation kinks")


def _cmd_gradcheck(args) -> int:
    config = parse_config(args.config)
    prepared = prepare_experiment(config)
    if args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    rng = np.random.default_rng([config.run_seed, 101])
    worst = 0.0
    for trial in range(args.trials):
        w, batch = _sample_point(prepared.objective, prepared.train, rng)
        report = gradcheck(prepared.objective, w, batch, h=args.h)
        worst = max(worst, report.max_rel_error)
        print(
            f"trial {trial + 1}/{args.trials}: max rel error {report.max_rel_error:.3e} "
            f"at coordinate {report.worst_coordinate} (h={report.h_used:g})"
        )
    print(f"worst over {args.trials} trial(s): {worst:.3e}")
    return EXIT_OK


def _cmd_linesearch(args) -> int:
    config = parse_config(args.config)
    prepared = prepare_experiment(config)
    objective, train = prepared.objective, prepared.train
    w = objective.initial_params
    batch = train.to_batch()
    g = objective.gradient(w, batch)
    probe = make_probe(objective, w, g, batch)
    result = line_search_oracle(probe, args.lo, args.hi, args.points)
    print(f"grid [{result.lo:g}, {result.hi:g}] with {result.points} points")
    if result.diverged_points:
        print(f"diverged grid points skipped: {result.diverged_points}")
    print(f"eta_star = {result.eta_star!r}")
    print(f"f_star   = {result.f_star!r}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "gradcheck": _cmd_gradcheck,
    "linesearch": _cmd_linesearch,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return EXIT_CONFIG if code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (DivergenceError, DivergedProbeError) as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except AutolrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
