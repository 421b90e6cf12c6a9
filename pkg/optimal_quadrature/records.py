"""
Machine-readable output: the weights record and the convergence table.
"""

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

from .analysis import ConvergenceTable, ErrorNormReport, ProbeReport
from .dense_solver import QuadratureRule
from .errors import InvalidParameterError

FORMATS = ("json", "csv")

RECORD_FIELDS = (
    "m",
    "N",
    "h",
    "method",
    "nodes",
    "weights",
    "constraint_residuals",
    "norm_sq",
    "condition_estimate",
    "timings_ms",
)


@dataclass(frozen=True)
class OutputRecord:
    """One computed rule as written by the weights command."""
    m: int
    N: int
    h: float
    method: str
    nodes: list[float]
    weights: list[float]
    constraint_residuals: list[float]
    norm_sq: Optional[float] = None
    condition_estimate: Optional[float] = None
    timings_ms: Optional[float] = None

    @classmethod
    def from_rule(
        cls,
        rule: QuadratureRule,
        norm_sq: Optional[float] = None,
        timings_ms: Optional[float] = None,
    ) -> "OutputRecord":
        config = rule.config
        return cls(
            m=config.m,
            N=config.N,
            h=config.h,
            method=rule.method,
            nodes=[float(x) for x in rule.nodes],
            weights=[float(c) for c in rule.weights],
            constraint_residuals=[float(r) for r in rule.constraint_residuals()],
            norm_sq=norm_sq,
            condition_estimate=rule.condition_estimate,
            timings_ms=timings_ms,
        )

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in RECORD_FIELDS}

    def to_json(self) -> str:
        # repr-based float formatting is the shortest string that round-trips
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """One row per node; residual column filled on the first m rows only."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for beta, (x, c) in enumerate(zip(self.nodes, self.weights)):
            residual = self.constraint_residuals[beta] if beta < len(self.constraint_residuals) else None
            writer.writerow([
                self.m,
                self.N,
                _number(self.h),
                self.method,
                _number(x),
                _number(c),
                _number(residual),
                _number(self.norm_sq),
                _number(self.condition_estimate),
                _number(self.timings_ms),
            ])
        return buffer.getvalue()

    def serialize(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise InvalidParameterError(f"Unknown format '{fmt}' (expected one of {', '.join(FORMATS)})")


def _number(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def convergence_csv(table: ConvergenceTable) -> str:
    """One row per N: norm, per-function errors, trapezoid baseline, log-log slope."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = ["N", "norm_sq"]
    header += [f"error_{name}" for name in table.functions]
    header += [f"trapezoid_error_{name}" for name in table.functions]
    header += ["trapezoid_norm_sq", "slope"]
    writer.writerow(header)
    for row in table.rows:
        writer.writerow(
            [row.N, _number(row.norm_sq)]
            + [_number(row.errors[name]) for name in table.functions]
            + [_number(row.trapezoid_errors[name]) for name in table.functions]
            + [_number(row.trapezoid_norm_sq), _number(row.slope)]
        )
    return buffer.getvalue()


def convergence_json(table: ConvergenceTable) -> str:
    rows = [
        {
            "N": row.N,
            "norm_sq": row.norm_sq,
            "errors": row.errors,
            "trapezoid_errors": row.trapezoid_errors,
            "trapezoid_norm_sq": row.trapezoid_norm_sq,
            "slope": row.slope,
        }
        for row in table.rows
    ]
    return json.dumps({"m": table.m, "method": table.method, "rows": rows}, indent=2)


def print_norm(report: ErrorNormReport, rule: QuadratureRule) -> None:
    """Print an error-norm report in a readable format."""
    config = rule.config
    print(f"\n{'=' * 60}")
    print(f" Error functional norm: m = {config.m}, N = {config.N} ({rule.method})")
    print(f"{'=' * 60}\n")
    print(f"  2 sum C f_m        {report.term_linear:.17g}")
    print(f"  sum sum C C G_m    {report.term_quadratic:.17g}")
    print(f"  double integral    {report.term_constant:.17g}")
    print(f"  {'-' * 40}")
    print(f"  norm^2             {report.norm_sq:.17g}")
    print(f"  constraint defect  {report.constraint_residual:.3e}")


def print_probe(report: ProbeReport, rule: QuadratureRule) -> None:
    """Print a minimality probe in a readable format."""
    config = rule.config
    icon = "✓" if report.passed else "✗"
    print(f"\n{'=' * 60}")
    print(f" Minimality probe: m = {config.m}, N = {config.N} ({rule.method})")
    print(f"{'=' * 60}\n")
    print(f"  Trials:        {report.trials} x 2 (magnitude {report.magnitude:g}, seed {report.seed})")
    print(f"  Increase:      min {report.min_increase:.6e}, max {report.max_increase:.6e}")
    print(f"  Stationarity:  {report.stationarity:.3e}")
    print(f"  {icon} {'no decrease observed' if report.passed else f'{report.violations} decreases observed'}")
