"""Command-line entry point (``fama-ic``)."""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Optional

from src.config import settings
from src.core.errors import ConfigError, FamaError
from src.services.selftest import format_table, run_selftest
from src.services.validation import has_errors, load_run_config, validate
from src.tasks.sweep import COMMAND_METRICS, RunOptions, SweepRunner

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Outage, delay outage and ergodic capacity of the two-user FAMA interference channel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="TOML run configuration")
    common.add_argument("--seed", type=int, help="base seed for integration and simulation")
    common.add_argument("--tol", type=float, help="absolute tolerance of each copula evaluation")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--sampler", choices=["copula", "physical"])
    common.add_argument("--dor-variant", choices=["derived", "theorem", "proof"])
    policy = common.add_mutually_exclusive_group()
    policy.add_argument("--strict", dest="policy", action="store_const", const="error",
                        help="fail when ζ̄ <= γ̄ (default)")
    policy.add_argument("--warn", dest="policy", action="store_const", const="warn",
                        help="log a warning when ζ̄ <= γ̄ and continue")

    helps = {
        "op": "outage probability sweep",
        "dor": "delay outage rate sweep",
        "ec": "ergodic capacity sweep",
        "region": "capacity region at the expected port maxima",
        "emax": "expected port maximum, heuristic vs Monte Carlo",
        "mc": "Monte Carlo estimates of OP, DOR and EC only",
        "sweep": "OP, DOR and EC in every variant",
    }
    for name in COMMAND_METRICS:
        sub.add_parser(name, parents=[common], help=helps[name])
    sub.add_parser("validate", parents=[common], help="report problems in a run configuration")
    sub.add_parser("selftest", help="run the built-in known-answer checks")
    return parser


def _options(args: argparse.Namespace) -> RunOptions:
    if args.trials is not None and args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if args.tol is not None and not args.tol > 0.0:
        raise ConfigError("--tol must be > 0")
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be >= 0")
    return RunOptions(
        seed=args.seed,
        tol=args.tol,
        trials=args.trials,
        sampler=args.sampler,
        dor_variant=args.dor_variant,
        policy=args.policy,
        out_dir=args.out,
        config_path=args.config,
    )


def _run(args: argparse.Namespace) -> int:
    if args.command == "selftest":
        results = run_selftest()
        print(format_table(results))
        return 0 if all(r.passed for r in results) else 1

    cfg = load_run_config(args.config)
    options = _options(args)

    if args.command == "validate":
        diagnostics = validate(cfg, options.policy)
        for d in diagnostics:
            print(d)
        if not diagnostics:
            print("ok")
        return 3 if has_errors(diagnostics) else 0

    runner = SweepRunner(cfg, args.command, options)
    files = asyncio.run(runner.run())
    for path in files:
        print(path)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except FamaError as e:
        message = str(e).replace('"', "'")
        print(f'error={e.reason} message="{message}"', file=sys.stderr)
        logger.debug("Run failed", exc_info=True)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
