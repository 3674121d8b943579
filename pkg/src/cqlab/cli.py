"""Command-line entry points.

``cqlab run <config.toml> --out <dir>`` executes one configured scenario and
writes its artifact set; ``cqlab accept <suite>`` runs the numbered release
checks and prints one line per criterion.

Exit codes: 0 success, 2 configuration/validation problem, 3 solver abort
(caustic, phase defect, lost particles, non-convergence), 4 acceptance
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .acceptance import SUITES, format_result, run_suite
from .errors import (
    CausticError,
    CoverageError,
    NonConvergenceError,
    PhaseNodeError,
    UnsupportedObservableError,
    UnsupportedPotentialError,
    ValidationError,
    VortexError,
    ZeroCaptureError,
)

_VALIDATION_ERRORS = (
    ValidationError,
    UnsupportedPotentialError,
    UnsupportedObservableError,
)
_SOLVER_ERRORS = (
    CausticError,
    PhaseNodeError,
    VortexError,
    NonConvergenceError,
    CoverageError,
    ZeroCaptureError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario config")
    run_p.add_argument("config", type=Path, help="TOML scenario file")
    run_p.add_argument("--out", type=Path, required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--quiet", action="store_true", help="suppress progress output")

    acc_p = sub.add_parser("accept", help="run a release-check suite")
    acc_p.add_argument("suite", choices=sorted(SUITES), help="suite name")
    acc_p.add_argument("--quiet", action="store_true", help="print only the final verdict")
    return parser


def _cmd_run(args) -> int:
    from .config import load_config
    from .scenarios import run_scenario

    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return 2
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        report = run_scenario(cfg, args.out, seed=args.seed)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _SOLVER_ERRORS as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return 3

    if not args.quiet:
        print(f"scenario '{report.label}' ({report.family}) -> {args.out}")
        for inv in report.invariants:
            verdict = "ok" if inv.passed else "VIOLATED"
            print(f"  invariant {inv.name}: {inv.value:.3e} (tol {inv.tolerance:.1e}) {verdict}")
        for name in report.files:
            print(f"  wrote {name}")
        print(f"  wall time {report.wall_time_s:.2f}s")
    if not report.all_passed:
        print("error: run invariants violated; see report.json", file=sys.stderr)
        return 3
    return 0


def _cmd_accept(args) -> int:
    results = run_suite(args.suite)
    if not args.quiet:
        for res in results:
            print(format_result(res))
    failed = [res for res in results if not res.passed]
    total = len(results)
    print(f"suite '{args.suite}': {total - len(failed)}/{total} criteria passed")
    return 4 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_accept(args)


if __name__ == "__main__":
    sys.exit(main())
