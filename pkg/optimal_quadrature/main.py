#!/usr/bin/env python3
"""
CLI entry point for optimal quadrature weights in W2^(m,0).

Usage:
    optquad weights --m 3 --N 10 --method sobolev --format json
    optquad weights --m 1 --N 10 --method closed --verify
    optquad verify --m 3 --N 3,10
    optquad converge --m 1 --N 2,4,8,16 --functions exp,runge
    optquad norm --m 3 --N 10 --method dense
    optquad probe --m 3 --N 10 --trials 100 --seed 7
    optquad weights --config run.env
"""

import argparse
import json
import logging
import os
import sys
import time

from dotenv import load_dotenv

load_dotenv()

from .analysis import (
    METHODS,
    convergence_study,
    error_norm_squared,
    minimality_probe,
    optimal_rule,
)
from .config import (
    default_log_level,
    default_seed,
    load_config,
    parse_bool,
    parse_int_list,
)
from .errors import InvalidParameterError, PreconditionError, QuadratureError, VerificationError
from .kernel import ProblemConfig
from .records import FORMATS, OutputRecord, convergence_csv, convergence_json, print_norm, print_probe
from .verification import agreement_tol, print_report, run_suite

logger = logging.getLogger(__name__)

VERIFY_RESIDUAL_TOL = 1e-9

# Converters for values read from a --config file.
_CONFIG_TYPES = {
    "m": int,
    "N": str,
    "method": str,
    "format": str,
    "seed": int,
    "verify": parse_bool,
    "functions": str,
    "trials": int,
    "magnitude": float,
}


def _single_n(args) -> int:
    values = parse_int_list(args.N)
    if len(values) != 1:
        raise InvalidParameterError(f"--N takes a single value for '{args.command}', got {args.N!r}")
    return values[0]


def _config(args) -> ProblemConfig:
    return ProblemConfig(args.m, _single_n(args))


def _cross_check(rule, args) -> None:
    """Compare against an independent route and re-check exactness."""
    config = rule.config
    residual = max(abs(r) for r in rule.constraint_residuals())
    if residual > VERIFY_RESIDUAL_TOL:
        raise VerificationError(
            f"constraint residual {residual:.3e} exceeds {VERIFY_RESIDUAL_TOL:.0e}",
            details={"residual": residual},
        )
    reference_method = "sobolev" if args.method == "dense" else "dense"
    reference = optimal_rule(config, reference_method)
    difference = float(max(abs(rule.weights - reference.weights)))
    if difference > agreement_tol(config.m, args.method):
        raise VerificationError(
            f"{args.method} and {reference_method} weights differ by {difference:.3e}",
            details={"difference": difference},
        )
    logger.info("cross-check against %s: max difference %.3e", reference_method, difference)


def cmd_weights(args) -> None:
    config = _config(args)
    started = time.perf_counter()
    rule = optimal_rule(config, args.method)
    elapsed = (time.perf_counter() - started) * 1000.0
    if args.verify:
        _cross_check(rule, args)
    try:
        norm_sq = error_norm_squared(config, rule).norm_sq
    except PreconditionError as e:
        logger.warning("norm not reported: %s", e)
        norm_sq = None
    record = OutputRecord.from_rule(rule, norm_sq=norm_sq, timings_ms=elapsed if args.timings else None)
    print(record.serialize(args.format or "json"))


def cmd_verify(args) -> None:
    report = run_suite(
        args.m,
        parse_int_list(args.N),
        trials=args.trials,
        magnitude=args.magnitude,
        seed=args.seed,
    )
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print_report(report)
    if not report.passed:
        names = ", ".join(sorted({check.name for check in report.failures()}))
        raise VerificationError(f"{len(report.failures())} checks failed: {names}")


def cmd_converge(args) -> None:
    functions = [name.strip() for name in args.functions.split(",") if name.strip()]
    table = convergence_study(args.m, parse_int_list(args.N), functions, method=args.method)
    if args.format == "json":
        print(convergence_json(table))
    else:
        print(convergence_csv(table), end="")


def cmd_norm(args) -> None:
    config = _config(args)
    rule = optimal_rule(config, args.method)
    report = error_norm_squared(config, rule)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print_norm(report, rule)


def cmd_probe(args) -> None:
    config = _config(args)
    rule = optimal_rule(config, args.method)
    report = minimality_probe(config, rule, trials=args.trials, magnitude=args.magnitude, seed=args.seed)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print_probe(report, rule)
    if not report.passed:
        raise VerificationError(f"{report.violations} perturbations decreased the norm")


COMMANDS = {
    "weights": cmd_weights,
    "verify": cmd_verify,
    "converge": cmd_converge,
    "norm": cmd_norm,
    "probe": cmd_probe,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="Odd space order m")
    common.add_argument("--N", help="Number of intervals (comma-separated list for verify/converge)")
    common.add_argument("--method", choices=METHODS, help="Solver route (default: sobolev)")
    common.add_argument("--format", choices=FORMATS + ("text",), help="Output format")
    common.add_argument("--seed", type=int, help="Probe seed (defaults to OPTQUAD_SEED)")
    common.add_argument(
        "--verify",
        action="store_true",
        default=None,
        help="Cross-check the weights against an independent route",
    )
    common.add_argument("--functions", help="Comma-separated test functions for converge")
    common.add_argument("--trials", type=int, help="Perturbations per probe (default: 100)")
    common.add_argument("--magnitude", type=float, help="Perturbation size (default: 1e-3)")
    common.add_argument("--timings", action="store_true", help="Include wall-clock timings in the record")
    common.add_argument("--config", "-c", help="Path to a key=value file mirroring the flags")
    common.add_argument("--log-level", help="Logging level (defaults to OPTQUAD_LOG_LEVEL or WARNING)")

    parser = argparse.ArgumentParser(
        prog="optquad",
        description="Optimal quadrature weights in W2^(m,0) on equally spaced nodes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("weights", parents=[common], help="Compute weights and write one record")
    sub.add_parser("verify", parents=[common], help="Run the property suite")
    sub.add_parser("converge", parents=[common], help="Convergence table as CSV")
    sub.add_parser("norm", parents=[common], help="Squared norm of the error functional")
    sub.add_parser("probe", parents=[common], help="Random feasible perturbations around the optimum")
    return parser


def _apply_config_file(args) -> None:
    """Fill flags that were not given on the command line from --config."""
    if not args.config:
        return
    if not os.path.exists(args.config):
        raise FileNotFoundError(f"Config file not found: {args.config}")
    for key, raw in load_config(args.config).items():
        if getattr(args, key, None) is None:
            setattr(args, key, _CONFIG_TYPES[key](raw))


def _apply_defaults(args) -> None:
    if args.m is None:
        raise InvalidParameterError("--m is required")
    if args.N is None:
        raise InvalidParameterError("--N is required")
    args.N = str(args.N)
    if args.method is None:
        args.method = "sobolev"
    if args.method not in METHODS:
        raise InvalidParameterError(f"Unknown method '{args.method}' (expected one of {', '.join(METHODS)})")
    if args.seed is None:
        args.seed = default_seed()
    if args.trials is None:
        args.trials = 100
    if args.magnitude is None:
        args.magnitude = 1e-3
    if args.functions is None:
        args.functions = "exp,runge"
    args.verify = bool(args.verify)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        logging.basicConfig(
            level=(args.log_level or default_log_level()).upper(),
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        _apply_config_file(args)
        _apply_defaults(args)
        COMMANDS[args.command](args)
    except QuadratureError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    except FileNotFoundError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(2)
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    main()
