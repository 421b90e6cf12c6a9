"""
Dense solve of the discrete Wiener-Hopf system for the optimal weights.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Optional, Union

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .config import working_dps
from .errors import SingularSystemError
from .expsum import (
    exact_basis,
    exact_basis_integral,
    exact_basis_value,
    f_mp,
    green_mp,
    make_context,
)
from .kernel import (
    MultiplierSet,
    ProblemConfig,
    basis_integral,
    exactness_basis,
    f_value,
    green_value,
)

logger = logging.getLogger(__name__)

WARN_CONDITION = 1e12
MAX_CONDITION = 1e15
RESIDUAL_TOL = 1e-10
_HAGER_STEPS = 5


class Method(str, Enum):
    """Provenance of a rule."""
    DENSE = "dense"
    SOBOLEV = "sobolev"
    CLOSED_M1 = "closed-form-m1"
    CLOSED_M3 = "closed-form-m3"
    TRAPEZOID = "trapezoid"
    PROJECTED = "trapezoid-projected"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Weights C_0..C_N on the nodes h*beta, with the solver that produced them."""
    config: ProblemConfig
    weights: np.ndarray
    method: str
    condition_estimate: Optional[float] = None
    residual: Optional[float] = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (self.config.N + 1,):
            raise ValueError(
                f"expected {self.config.N + 1} weights, got shape {weights.shape}"
            )
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @property
    def nodes(self) -> np.ndarray:
        return self.config.nodes

    def apply(self, f: Callable) -> float:
        """Sum of C_beta f(x_beta)."""
        values = np.asarray([f(x) for x in self.nodes], dtype=float)
        return float(np.dot(self.weights, values))

    def constraint_residuals(self) -> np.ndarray:
        """Quadrature error on each exactness-basis member, in constraint order."""
        nodes = self.nodes
        return np.array([
            float(np.dot(self.weights, b(nodes))) - basis_integral(b)
            for b in exactness_basis(self.config.m)
        ])

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.weights - self.weights[::-1])))


@dataclass(frozen=True, eq=False)
class DenseSystem:
    """
    KKT matrix [G E^T; E 0] and right-hand side [f; integrals].

    In oracle mode the same system is also held as an mpmath matrix.
    """
    config: ProblemConfig
    matrix: np.ndarray
    rhs: np.ndarray
    ctx: Any = None
    exact_matrix: Any = None
    exact_rhs: Any = None

    @property
    def size(self) -> int:
        return self.config.N + 1 + self.config.m

    @property
    def dps(self) -> Optional[int]:
        return self.ctx.dps if self.ctx is not None else None


def assemble(config: ProblemConfig, dps: Optional[int] = None) -> DenseSystem:
    """
    Build the dense system for a configuration.

    Args:
        config: Problem configuration (validated on construction)
        dps: Decimal digits for an extended-precision copy; None for float64 only

    Returns:
        DenseSystem with unknowns C_0..C_N followed by d0, d1[k], d2[k]
    """
    m, N = config.m, config.N
    n = N + 1
    nodes = config.nodes
    basis = exactness_basis(m)

    offsets = np.arange(n)
    column = green_value(m, offsets * config.h)
    matrix = np.zeros((n + m, n + m))
    matrix[:n, :n] = column[np.abs(offsets[:, None] - offsets[None, :])]
    constraints = np.array([b(nodes) for b in basis])
    matrix[n:, :n] = constraints
    matrix[:n, n:] = constraints.T
    rhs = np.concatenate([f_value(m, nodes), [basis_integral(b) for b in basis]])

    if dps is None:
        logger.debug("Assembled %dx%d system in double precision", n + m, n + m)
        return DenseSystem(config, matrix, rhs)

    ctx = make_context(dps)
    grid = [ctx.mpf(beta) / N for beta in range(n)]
    exact_column = [green_mp(ctx, m, x) for x in grid]
    exact = ctx.matrix(n + m, n + m)
    for beta in range(n):
        for gamma in range(n):
            exact[beta, gamma] = exact_column[abs(beta - gamma)]
    exact_rhs = ctx.matrix(n + m, 1)
    for beta, x in enumerate(grid):
        exact_rhs[beta] = f_mp(ctx, m, x)
    for row, (kind, rate) in enumerate(exact_basis(ctx, m)):
        for beta, x in enumerate(grid):
            value = exact_basis_value(ctx, kind, rate, x)
            exact[n + row, beta] = value
            exact[beta, n + row] = value
        exact_rhs[n + row] = exact_basis_integral(ctx, kind, rate)

    logger.debug("Assembled %dx%d system at %d digits", n + m, n + m, dps)
    return DenseSystem(config, matrix, rhs, ctx, exact, exact_rhs)


def _condition_thresholds(dps: Optional[int]) -> tuple[float, float]:
    if dps is None:
        return WARN_CONDITION, MAX_CONDITION
    scale = 10.0 ** max(dps - 16, 0)
    return WARN_CONDITION * scale, MAX_CONDITION * scale


def _solve_double(sys: DenseSystem, equilibrate: bool) -> tuple[np.ndarray, float]:
    matrix, rhs = sys.matrix, sys.rhs
    row_scale = np.ones(sys.size)
    col_scale = np.ones(sys.size)
    if equilibrate:
        row_scale = 1.0 / np.max(np.abs(matrix), axis=1)
        scaled = row_scale[:, None] * matrix
        col_scale = 1.0 / np.max(np.abs(scaled), axis=0)
        matrix = scaled * col_scale[None, :]
        rhs = row_scale * rhs

    lu, piv = scipy.linalg.lu_factor(matrix, check_finite=False)
    rcond, info = lapack.dgecon(lu, np.linalg.norm(matrix, 1), norm="1")
    condition = float("inf") if info != 0 or rcond == 0.0 else 1.0 / rcond
    if not np.all(np.isfinite(lu)) or np.any(np.diag(lu) == 0.0):
        raise SingularSystemError("KKT matrix is exactly singular", condition=condition)
    _check_condition(condition, None)
    solution = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    return col_scale * solution, condition


def _hager_norm_inverse(ctx, lu, pivots, n: int):
    """1-norm estimate of A^{-1} for symmetric A from its LU factors."""
    def apply_inverse(vector):
        return ctx.U_solve(lu, ctx.L_solve(lu, vector, pivots))

    probe = ctx.matrix([ctx.mpf(1) / n] * n)
    estimate = ctx.mpf(0)
    for _ in range(_HAGER_STEPS):
        image = apply_inverse(probe)
        estimate = ctx.fsum(abs(v) for v in image)
        signs = ctx.matrix([1 if v >= 0 else -1 for v in image])
        dual = apply_inverse(signs)
        best = max(range(n), key=lambda i: abs(dual[i]))
        if abs(dual[best]) <= ctx.fsum(dual[i] * probe[i] for i in range(n)):
            break
        probe = ctx.matrix([0] * n)
        probe[best] = 1
    return estimate


def _solve_exact(sys: DenseSystem) -> tuple[np.ndarray, float]:
    ctx = sys.ctx
    try:
        lu, pivots = ctx.LU_decomp(sys.exact_matrix, use_cache=False)
    except ZeroDivisionError as e:
        raise SingularSystemError(f"KKT matrix is numerically singular at {ctx.dps} digits: {e}") from e
    norm = ctx.mnorm(sys.exact_matrix, 1)
    condition = float(norm * _hager_norm_inverse(ctx, lu, pivots, sys.size))
    _check_condition(condition, ctx.dps)
    solution = ctx.U_solve(lu, ctx.L_solve(lu, sys.exact_rhs, pivots))
    return solution, condition


def _check_condition(condition: float, dps: Optional[int]) -> None:
    warn_at, fail_at = _condition_thresholds(dps)
    if condition > fail_at:
        raise SingularSystemError(
            f"KKT matrix condition estimate {condition:.3e} exceeds {fail_at:.1e}",
            condition=condition,
        )
    if condition > warn_at:
        logger.warning("KKT matrix condition estimate %.3e exceeds %.1e", condition, warn_at)


def solve(sys: DenseSystem, equilibrate: bool = False) -> tuple[QuadratureRule, MultiplierSet]:
    """
    Solve the KKT system by LU with partial pivoting.

    Args:
        sys: Assembled system; oracle mode is used when it carries an exact copy
        equilibrate: Scale rows and columns before a double-precision solve

    Returns:
        (rule, multipliers) with the condition estimate and residual recorded on the rule
    """
    n = sys.config.N + 1
    notes = []
    if sys.ctx is None:
        solution, condition = _solve_double(sys, equilibrate)
        residual = float(np.max(np.abs(sys.matrix @ solution - sys.rhs)))
        scale = float(np.max(np.abs(sys.rhs)))
        values = solution
    else:
        ctx = sys.ctx
        exact, condition = _solve_exact(sys)
        defect = sys.exact_matrix * exact - sys.exact_rhs
        residual = float(ctx.mnorm(defect, "inf"))
        scale = float(ctx.mnorm(sys.exact_rhs, "inf"))
        values = np.array([float(exact[i]) for i in range(sys.size)])

    if residual > RESIDUAL_TOL * scale:
        message = f"KKT residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e} * |rhs|"
        logger.warning(message)
        notes.append(message)
    if condition > _condition_thresholds(sys.dps)[0]:
        notes.append(f"condition estimate {condition:.3e}")

    rule = QuadratureRule(
        sys.config,
        values[:n],
        Method.DENSE.value,
        condition_estimate=condition,
        residual=residual,
        warnings=tuple(notes),
    )
    return rule, MultiplierSet.from_vector(values[n:])


def solve_config(
    config: ProblemConfig,
    dps: Union[int, str, None] = "auto",
    equilibrate: bool = False,
) -> tuple[QuadratureRule, MultiplierSet]:
    """
    Assemble and solve in one call.

    "auto" solves m = 1 in double precision and higher orders in extended
    precision, where the KKT matrix is too ill-conditioned for float64.
    """
    if dps == "auto":
        dps = None if config.m == 1 else working_dps(config.m, config.N)
    return solve(assemble(config, dps), equilibrate=equilibrate)
