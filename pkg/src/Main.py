#!/usr/bin/env python3
import argparse
import logging
import sys
from typing import List, Optional

from context import RUN_LOG_DB, configure_logging
from db import cleanup_old_logs, close_db, init_db
from config_store import load_config
from cli_commands import COMMANDS, EXIT_INPUT, RunConfig, execute


def _add_common(
    parser: argparse.ArgumentParser,
    intercept_help: str = "do not fit an intercept; response and predictors are used uncentered",
) -> None:
    parser.add_argument("--input", help="CSV with header; response column 'y'")
    parser.add_argument("--config", help="JSON settings for diagnose/ssvs/simulate")
    parser.add_argument("--output", help="write the JSON (or CSV for penalty) here instead of stdout")
    parser.add_argument("--csv-output", dest="csv_output", help="CSV side output")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--budget", type=int, help="enumeration budget (models or subsets)")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--no-intercept", dest="intercept", action="store_false", help=intercept_help)
    parser.add_argument("--no-meta", dest="include_meta", action="store_false")


def _add_model(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--prior", help="geometric:0.5 | binomial:0.1 | binomial:RIC | uniform | JSON object")
    parser.add_argument("--criterion", choices=["AIC", "BIC", "RIC"], help="binomial prior calibrated to a criterion")
    parser.add_argument("--gamma", type=float, help="g-prior scale (default: p)")
    parser.add_argument("--sigma-sq", dest="sigma_sq", type=float)
    parser.add_argument("--estimate-sigma", dest="estimate_sigma", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mapsel", description="MAP model selection for Gaussian linear regression")
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="exhaustive MAP model selection")
    _add_common(p_select)
    _add_model(p_select)

    p_ssvs = sub.add_parser("ssvs", help="Gibbs stochastic search over models")
    _add_common(p_ssvs)
    _add_model(p_ssvs)
    p_ssvs.add_argument("--sweeps", type=int)
    p_ssvs.add_argument("--burn-in", dest="burn_in", type=int)
    p_ssvs.add_argument("--chains", type=int)
    p_ssvs.add_argument("--top-k", dest="top_k", type=int)

    p_penalty = sub.add_parser("penalty", help="print the complexity penalty schedule")
    _add_common(p_penalty)
    _add_model(p_penalty)
    p_penalty.add_argument("--p", type=int, help="number of predictors when no --input is given")
    p_penalty.add_argument("--rank", type=int, help="design rank (default: p)")

    p_diag = sub.add_parser("diagnose", help="sparse eigenvalues and multicollinearity functionals")
    _add_common(p_diag, intercept_help="use the design columns as given; by default every column is centered")
    p_diag.add_argument("--threshold", type=float, help="tau[r] threshold for the design label")
    p_diag.add_argument("--k-max", dest="k_max", type=int)

    p_sim = sub.add_parser("simulate", help="Monte Carlo risk comparison")
    _add_common(p_sim)
    p_sim.add_argument("--scenario", help="template name or scenario JSON path")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__slots__
    values = {name: getattr(args, name) for name in fields if hasattr(args, name)}
    return RunConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    if args.command not in COMMANDS:
        return EXIT_INPUT

    if RUN_LOG_DB:
        try:
            init_db(RUN_LOG_DB)
            cleanup_old_logs(load_config().log_retention_days)
        except Exception:
            logging.exception("[CLI] run ledger unavailable")

    result = execute(config_from_args(args))
    if result.payload is not None:
        sys.stdout.write(result.payload)
        sys.stdout.flush()
    if not result.ok:
        sys.stderr.write(result.message + "\n")
    close_db()
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
