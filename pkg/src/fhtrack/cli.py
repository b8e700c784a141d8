"""Command-line experiment runner.

One subcommand per scenario plus ``check`` for the fast invariant suite.
Flags override config-file fields.  Exit codes: 0 success, 2 tracking
constraint violation, 3 solver non-convergence, 4 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .config import SCENARIOS, ExperimentConfig
from .errors import (ConfigError, ConstraintViolationError, ConvergenceError,
                     NormDriftError)
from .runner import ExperimentRunner

EXIT_CONSTRAINT = 2
EXIT_NONCONVERGENCE = 3
EXIT_CONFIG = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fhtrack",
        description="Tracking control experiments on the driven 1D "
                    "Fermi-Hubbard chain")
    sub = parser.add_subparsers(dest="command", required=True)

    for scenario in SCENARIOS:
        p = sub.add_parser(scenario, help=f"run the {scenario} scenario")
        _add_common_options(p)

    p = sub.add_parser("check", help="fast invariant suite on a small chain")
    p.add_argument("--steps-per-cycle", type=int, default=2000)
    return parser


def _add_common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("-o", "--outdir", help="output directory")
    p.add_argument("--sites", type=int, help="chain length L")
    p.add_argument("--u-list", type=float, nargs="+", metavar="U_OVER_T0",
                   help="interaction strengths in units of t0")
    p.add_argument("--e0", type=float, help="peak field in MV/cm")
    p.add_argument("--cycles", type=int, help="pulse cycle count")
    p.add_argument("--steps-per-cycle", type=int)
    p.add_argument("--no-plots", action="store_true")


def _load_config(args) -> ExperimentConfig:
    cfg = (ExperimentConfig.from_json(args.config) if args.config
           else ExperimentConfig())
    cfg.scenario = args.command
    if args.outdir:
        cfg.outdir = args.outdir
    if args.sites:
        cfg.lattice.L = args.sites
        cfg.lattice.n_up = args.sites // 2
        cfg.lattice.n_down = args.sites // 2
    if args.u_list:
        cfg.u_over_t0 = list(args.u_list)
    if args.e0 is not None:
        cfg.pulse.e0 = args.e0
    if args.cycles:
        cfg.pulse.cycles = args.cycles
    if args.steps_per_cycle:
        cfg.numerics.steps_per_cycle = args.steps_per_cycle
    if args.no_plots:
        cfg.plots = False
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        from .check import main_check
        return main_check(steps_per_cycle=args.steps_per_cycle)
    try:
        cfg = _load_config(args)
        paths = ExperimentRunner(cfg).run()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConstraintViolationError as exc:
        print(f"tracking constraint violated: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (ConvergenceError, NormDriftError) as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
