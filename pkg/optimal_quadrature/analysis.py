"""
Error-functional norm, convergence studies and optimality probes.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .closed_form import weights_m1, weights_m3
from .dense_solver import Method, QuadratureRule, solve_config as dense_solve
from .errors import InvalidParameterError, PreconditionError
from .kernel import (
    ProblemConfig,
    basis_integral,
    check_order,
    exactness_basis,
    f_value,
    green_double_integral,
    green_value,
)
from .sobolev_solver import solve_config as sobolev_solve

logger = logging.getLogger(__name__)

CONSTRAINT_ERROR_TOL = 1e-6
CONSTRAINT_WARN_TOL = 1e-8
DECREASE_TOL = 1e-12
STATIONARITY_STEP = 1e-6

METHODS = ("dense", "sobolev", "closed")


@dataclass(frozen=True)
class NamedFunction:
    name: str
    func: Callable[[np.ndarray], np.ndarray]
    integral: float


NAMED_FUNCTIONS = {
    "exp": NamedFunction("exp", np.exp, math.e - 1.0),
    "expneg": NamedFunction("expneg", lambda x: np.exp(-x), -math.expm1(-1.0)),
    "runge": NamedFunction("runge", lambda x: 1.0 / (1.0 + 25.0 * (x - 0.5) ** 2), 0.4 * math.atan(2.5)),
    "cos": NamedFunction("cos", lambda x: np.cos(3.0 * x), math.sin(3.0) / 3.0),
    "poly": NamedFunction("poly", lambda x: x ** 2, 1.0 / 3.0),
    "sqrt": NamedFunction("sqrt", lambda x: np.sqrt(x + 1.0), (2.0 / 3.0) * (2.0 ** 1.5 - 1.0)),
}


def named_function(name: str) -> NamedFunction:
    try:
        return NAMED_FUNCTIONS[name]
    except KeyError:
        raise InvalidParameterError(
            f"Unknown test function '{name}' (known: {', '.join(NAMED_FUNCTIONS)})"
        ) from None


def optimal_rule(config: ProblemConfig, method: str = "sobolev") -> QuadratureRule:
    """Optimal weights from the named route: dense, sobolev or closed."""
    if method == "dense":
        return dense_solve(config)[0]
    if method == "sobolev":
        return sobolev_solve(config)[0]
    if method == "closed":
        if config.m == 1:
            return weights_m1(config.N)
        if config.m == 3:
            return weights_m3(config.N)
        raise InvalidParameterError(f"closed form is available for m = 1 and m = 3 only, got m = {config.m}")
    raise InvalidParameterError(f"Unknown method '{method}' (expected one of {', '.join(METHODS)})")


@dataclass(frozen=True)
class ErrorNormReport:
    """Squared norm of the error functional and its three terms."""
    norm_sq: float
    term_linear: float
    term_quadratic: float
    term_constant: float
    constraint_residual: float = 0.0

    def to_dict(self) -> dict:
        return {
            "norm_sq": self.norm_sq,
            "term_linear": self.term_linear,
            "term_quadratic": self.term_quadratic,
            "term_constant": self.term_constant,
            "constraint_residual": self.constraint_residual,
        }


def _constraint_matrix(config: ProblemConfig) -> tuple[np.ndarray, np.ndarray]:
    basis = exactness_basis(config.m)
    rows = np.array([b(config.nodes) for b in basis])
    return rows, np.array([basis_integral(b) for b in basis])


def _green_column(config: ProblemConfig) -> np.ndarray:
    return green_value(config.m, np.arange(config.N + 1) * config.h)


def _green_apply(column: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Product of the symmetric Toeplitz matrix G(x_b - x_g) with a vector."""
    if column.size <= 512:
        return scipy.linalg.toeplitz(column) @ vector
    return scipy.linalg.matmul_toeplitz((column, column), vector)


def _check_constraints(config: ProblemConfig, weights: np.ndarray) -> float:
    rows, integrals = _constraint_matrix(config)
    residual = float(np.max(np.abs(rows @ weights - integrals) / (1.0 + np.abs(integrals))))
    if residual > CONSTRAINT_ERROR_TOL:
        raise PreconditionError(
            f"weights violate the exactness conditions by {residual:.3e}; "
            "the error norm is defined only on the constraint manifold",
            details={"residual": residual},
        )
    if residual > CONSTRAINT_WARN_TOL:
        logger.warning("constraint residual %.3e exceeds %.0e", residual, CONSTRAINT_WARN_TOL)
    return residual


def error_norm_squared(config: ProblemConfig, rule: QuadratureRule) -> ErrorNormReport:
    """
    norm^2 = 2 sum C_b f_m(x_b) - sum sum C_b C_g G_m(x_b - x_g) - double integral of G_m.

    Raises:
        PreconditionError: when the weights are off the constraint manifold by more than 1e-6
    """
    weights = np.asarray(rule.weights, dtype=float)
    residual = _check_constraints(config, weights)
    linear = 2.0 * float(np.dot(weights, f_value(config.m, config.nodes)))
    quadratic = float(np.dot(weights, _green_apply(_green_column(config), weights)))
    constant = green_double_integral(config.m)
    norm_sq = linear - quadratic - constant
    if norm_sq < -DECREASE_TOL:
        logger.warning("negative squared norm %.3e at m=%d N=%d", norm_sq, config.m, config.N)
    return ErrorNormReport(norm_sq, linear, quadratic, constant, residual)


def apply(rule: QuadratureRule, f: Callable) -> float:
    """Sum of C_beta f(x_beta)."""
    return rule.apply(f)


def trapezoid_rule(config: ProblemConfig) -> QuadratureRule:
    values = np.full(config.N + 1, config.h)
    values[0] = values[-1] = config.h / 2
    return QuadratureRule(config, values, Method.TRAPEZOID.value)


def project_to_constraints(config: ProblemConfig, weights: Sequence[float]) -> QuadratureRule:
    """Nearest weight vector (2-norm) satisfying the exactness conditions."""
    weights = np.asarray(weights, dtype=float)
    rows, integrals = _constraint_matrix(config)
    correction, *_ = scipy.linalg.lstsq(rows, integrals - rows @ weights)
    return QuadratureRule(config, weights + correction, Method.PROJECTED.value)


@dataclass(frozen=True)
class WeightProfile:
    """Plateau value, boundary-layer depth and symmetry of a rule."""
    plateau: float
    boundary_layer: int
    symmetry_defect: float


def interior_weight_profile(rule: QuadratureRule, tol: float = 1e-12) -> WeightProfile:
    weights = rule.weights
    plateau = float(weights[len(weights) // 2])
    deviating = np.flatnonzero(np.abs(weights - plateau) > tol * abs(plateau))
    half = len(weights) // 2
    left = deviating[deviating < half]
    depth = int(left.max() + 1) if left.size else 0
    return WeightProfile(plateau, depth, rule.symmetry_defect())


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    norm_sq: float
    errors: dict
    trapezoid_errors: dict
    trapezoid_norm_sq: float
    slope: Optional[float] = None
    seconds: float = 0.0


@dataclass(frozen=True)
class ConvergenceTable:
    m: int
    method: str
    functions: tuple[str, ...]
    rows: tuple[ConvergenceRow, ...] = field(default_factory=tuple)

    def norms(self) -> list[float]:
        return [row.norm_sq for row in self.rows]


def convergence_study(
    m: int,
    Ns: Sequence[int],
    test_functions: Sequence[str] = ("exp", "runge"),
    method: str = "sobolev",
) -> ConvergenceTable:
    """
    Optimal-rule norm and integration errors over a sequence of grids.

    The trapezoid columns use raw trapezoid weights for the integration errors
    and their projection onto the constraint manifold for the norm.
    """
    m = check_order(m)
    if not Ns:
        raise InvalidParameterError("at least one N is required")
    functions = [named_function(name) for name in test_functions]
    rows = []
    previous: Optional[tuple[int, float]] = None
    for N in Ns:
        started = time.perf_counter()
        config = ProblemConfig(m, N)
        rule = optimal_rule(config, method)
        report = error_norm_squared(config, rule)
        trapezoid = trapezoid_rule(config)
        projected = project_to_constraints(config, trapezoid.weights)
        slope = None
        if previous is not None and previous[1] > 0 and report.norm_sq > 0:
            slope = math.log(report.norm_sq / previous[1]) / math.log(N / previous[0])
        rows.append(ConvergenceRow(
            N=N,
            norm_sq=report.norm_sq,
            errors={fn.name: abs(rule.apply(fn.func) - fn.integral) for fn in functions},
            trapezoid_errors={fn.name: abs(trapezoid.apply(fn.func) - fn.integral) for fn in functions},
            trapezoid_norm_sq=error_norm_squared(config, projected).norm_sq,
            slope=slope,
            seconds=time.perf_counter() - started,
        ))
        previous = (N, report.norm_sq)
        logger.info("converge m=%d N=%d norm_sq=%.6e", m, N, report.norm_sq)
    return ConvergenceTable(m, method, tuple(fn.name for fn in functions), tuple(rows))


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of random feasible perturbations around a rule."""
    trials: int
    magnitude: float
    seed: int
    min_increase: float
    max_increase: float
    violations: int
    stationarity: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "magnitude": self.magnitude,
            "seed": self.seed,
            "min_increase": self.min_increase,
            "max_increase": self.max_increase,
            "violations": self.violations,
            "stationarity": self.stationarity,
            "passed": self.passed,
        }


def feasible_directions(config: ProblemConfig, count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit directions in the null space of the constraint rows, one per row of the result."""
    rows, _ = _constraint_matrix(config)
    q, _ = scipy.linalg.qr(rows.T, mode="economic")
    raw = rng.standard_normal((count, config.N + 1))
    projected = raw - (raw @ q) @ q.T
    norms = np.linalg.norm(projected, axis=1)
    if np.any(norms == 0.0):
        raise InvalidParameterError("no feasible perturbation direction exists (N + 1 = m)")
    return projected / norms[:, None]


def _shifted_norm(config: ProblemConfig, weights: np.ndarray, shift: np.ndarray) -> float:
    return error_norm_squared(config, QuadratureRule(config, weights + shift, "shifted")).norm_sq


def minimality_probe(
    config: ProblemConfig,
    rule: QuadratureRule,
    trials: int = 100,
    magnitude: float = 1e-3,
    seed: int = 0,
) -> ProbeReport:
    """
    Perturb the weights by +-magnitude along random feasible directions.

    The change of the squared norm along delta is 2 delta.(f - G C) - delta.G delta,
    evaluated term by term so that no large quantities cancel. Stationarity is the
    largest central difference of error_norm_squared at C +- STATIONARITY_STEP * delta.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be positive, got {trials}")
    _check_constraints(config, np.asarray(rule.weights))
    if config.N + 1 == config.m:
        logger.warning("N + 1 = m: the constraint manifold is a single point, nothing to probe")
        return ProbeReport(trials, magnitude, seed, 0.0, 0.0, 0, 0.0)
    rng = np.random.default_rng(seed)
    column = _green_column(config)
    weights = np.asarray(rule.weights)
    gradient = f_value(config.m, config.nodes) - _green_apply(column, weights)

    increases = []
    stationarity = 0.0
    for direction in feasible_directions(config, trials, rng):
        slope = 2.0 * float(np.dot(direction, gradient))
        curvature = -float(np.dot(direction, _green_apply(column, direction)))
        for sign in (1.0, -1.0):
            step = sign * magnitude
            increases.append(step * slope + step * step * curvature)
        forward = _shifted_norm(config, weights, STATIONARITY_STEP * direction)
        backward = _shifted_norm(config, weights, -STATIONARITY_STEP * direction)
        stationarity = max(stationarity, abs(forward - backward) / (2 * STATIONARITY_STEP))

    increases = np.array(increases)
    violations = int(np.count_nonzero(increases < -DECREASE_TOL))
    report = ProbeReport(
        trials=trials,
        magnitude=magnitude,
        seed=seed,
        min_increase=float(increases.min()),
        max_increase=float(increases.max()),
        violations=violations,
        stationarity=stationarity,
    )
    if violations:
        logger.warning("%d of %d perturbations did not increase the norm", violations, increases.size)
    return report
