"""
Command-line interface: ``spacetime-tt run`` and ``spacetime-tt compare``.

Exit codes: 0 on success, 1 on configuration or input errors, 2 when any
result row failed.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .config import SOLVER_VARIANTS, load_config
from .errors import SpacetimeTTError
from .problems import EXPERIMENTS
from .runner import compare_report, run_experiment, write_results, write_summary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_ROW_FAILURE = 2
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spacetime-tt",
        description="Space-time spectral collocation solvers in full-grid and tensor-train form.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug details")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings only")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment and write a result CSV")
    run.add_argument("config_file", nargs="?", type=Path, help="Config file (YAML/JSON or key=value)")
    run.add_argument("--config", type=Path, dest="config_flag", help="Config file; same as the positional argument")
    run.add_argument("--experiment", choices=EXPERIMENTS)
    run.add_argument("--solver", help=f"Comma-separated subset of {','.join(SOLVER_VARIANTS)}")
    run.add_argument("--N", dest="N", help="Comma-separated collocation points per dimension")
    run.add_argument("--eps-tt", type=float, help="TT tolerance (fixed eps, or floor of step truncation)")
    run.add_argument("--eps-cross", type=float, help="Cross interpolation tolerance")
    run.add_argument("--eps0", type=float, help="Initial tolerance of step truncation")
    run.add_argument("--eps-floor", type=float, help="Floor of step truncation (default: eps-tt)")
    run.add_argument("--tol-res", type=float, help="Relative residual stopping tolerance")
    run.add_argument("--tol-update", type=float, help="Relative update stopping tolerance")
    run.add_argument("--max-newton", type=int, help="Maximum Newton iterations")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path, help="Result CSV (default: $SPACETIME_TT_OUT or results.csv)")
    run.add_argument("--parallel", action="store_true", default=None, help="Run cells concurrently")
    run.add_argument("--no-reports", action="store_true", help="Skip JSON reports and TT checkpoints")

    compare = commands.add_parser("compare", help="Compare result CSVs")
    compare.add_argument("csv", nargs="+", type=Path, help="Result CSVs; the first is the baseline")
    compare.add_argument("--out", type=Path, help="Write the summary here instead of stdout")
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _run(args: argparse.Namespace) -> int:
    if args.config_file and args.config_flag and args.config_file != args.config_flag:
        logger.error("Config file given twice with different paths")
        return EXIT_INPUT_ERROR
    overrides = {
        "experiment": args.experiment,
        "solver": args.solver,
        "N": args.N,
        "eps_tt": args.eps_tt,
        "eps_cross": args.eps_cross,
        "eps0": args.eps0,
        "eps_floor": args.eps_floor,
        "tol_res": args.tol_res,
        "tol_update": args.tol_update,
        "max_newton": args.max_newton,
        "seed": args.seed,
        "out": args.out,
        "parallel": args.parallel,
    }
    config = load_config(args.config_file or args.config_flag, overrides)
    rows = run_experiment(config)
    write_results(rows, config.output_path, save_reports=not args.no_reports)
    failed = [row.name for row in rows if row.failed]
    if failed:
        logger.error(f"{len(failed)} of {len(rows)} runs failed: {', '.join(failed)}")
        return EXIT_ROW_FAILURE
    return EXIT_OK


def _compare(args: argparse.Namespace) -> int:
    summary = compare_report(args.csv)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as f:
            write_summary(summary, f)
    else:
        write_summary(summary, sys.stdout)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        if args.command == "run":
            return _run(args)
        return _compare(args)
    except (SpacetimeTTError, OSError) as e:
        logger.error(str(e))
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
