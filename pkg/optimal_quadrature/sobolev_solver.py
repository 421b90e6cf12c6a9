"""
Optimal weights as the discrete convolution C = D_m * u_m.

u_m equals f_m on the grid window [0, N] and is a finite exponential sum on
each side of it. Its outer branches carry 2m unknown coefficients, fixed by
requiring the convolution to vanish at the m grid points on either side of
the window.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .dense_solver import Method, QuadratureRule
from .discrete_operator import DiscreteOperator, for_grid
from .errors import (
    InvalidParameterError,
    OperatorIntegrityError,
    SingularSystemError,
)
from .expsum import ExpSum, interior_terms, p_generators, p_terms, q_terms
from .kernel import MultiplierSet, ProblemConfig, f_value, p_value, q_value

logger = logging.getLogger(__name__)

BOUNDARY_RESIDUAL_TOL = 1e-10
CONSTRAINT_WARN_TOL = 1e-9
REALITY_TOL = 1e-10


class Tails(str, Enum):
    """How the infinite convolution sums are evaluated."""
    ANALYTIC = "analytic"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class SplitMultipliers:
    """Coefficients of P on the left (dminus) and right (dplus) outer branches of u_m."""
    dminus: MultiplierSet
    dplus: MultiplierSet
    residual: float = 0.0
    exact: tuple = field(default=(), compare=False, repr=False)

    def recombine(self) -> tuple[MultiplierSet, MultiplierSet]:
        """(d, b) with d = (d+ + d-)/2 the Lagrange multipliers and b = (d+ - d-)/2."""
        minus, plus = self.dminus.as_vector(), self.dplus.as_vector()
        return (
            MultiplierSet.from_vector((plus + minus) / 2),
            MultiplierSet.from_vector((plus - minus) / 2),
        )

    def to_dict(self) -> dict:
        return {"dminus": self.dminus.to_dict(), "dplus": self.dplus.to_dict()}


@dataclass(frozen=True, eq=False)
class UFunction:
    """u_m on the grid h*beta for every integer beta."""
    config: ProblemConfig
    values: np.ndarray
    multipliers: SplitMultipliers

    def __call__(self, beta: int) -> float:
        return u_value(self, beta)


class _Convolver:
    """Convolution of D_m against u_m written as u_M plus branch corrections."""

    def __init__(self, op: DiscreteOperator, N: int):
        ctx = op.ctx
        self.op = op
        self.ctx = ctx
        self.N = N
        m = op.m
        half_q = q_terms(ctx, m).scaled(ctx.mpf(1) / (2 * m))
        extension = interior_terms(ctx, m)
        self.left_fixed = -half_q - extension
        self.right_fixed = half_q - extension
        self.generators = p_generators(ctx, m)
        # u_M is annihilated except for its constant -1.
        self.mass = -op.total_mass()

    def left(self, terms: ExpSum, beta: int):
        """Sum over gamma < 0 of D_m(beta - gamma) * terms(h gamma)."""
        total = self.ctx.mpf(0)
        for c, rate in terms.terms:
            z = self.ctx.exp(rate * self.op.step)
            total += c * z ** beta * self.op.half_line_sum(beta + 1, 1 / z)
        return total

    def right(self, terms: ExpSum, beta: int):
        """Sum over gamma > N of D_m(beta - gamma) * terms(h gamma)."""
        total = self.ctx.mpf(0)
        for c, rate in terms.terms:
            z = self.ctx.exp(rate * self.op.step)
            total += c * z ** beta * self.op.half_line_sum(self.N + 1 - beta, z)
        return total

    def at(self, beta: int, left: ExpSum, right: ExpSum):
        return self.mass + self.left(left, beta) + self.right(right, beta)

    def real(self, value, what: str):
        ctx = self.ctx
        if abs(ctx.im(value)) > REALITY_TOL * (1 + abs(ctx.re(value))):
            raise OperatorIntegrityError(
                f"{what} has imaginary part {float(ctx.im(value)):.3e}"
            )
        return ctx.re(value)


def _check_operator(config: ProblemConfig, op: DiscreteOperator) -> None:
    if op.m != config.m:
        raise InvalidParameterError(f"operator order {op.m} does not match m = {config.m}")
    if abs(op.step * config.N - 1) > 1e3 * op.ctx.eps:
        raise InvalidParameterError(
            f"operator step {op.h} does not match h = 1/{config.N}"
        )


def boundary_rows(config: ProblemConfig) -> list[int]:
    """The 2m grid indices just outside [0, N] where D_m * u_m must vanish."""
    m, N = config.m, config.N
    return [-j for j in range(1, m + 1)] + [N + j for j in range(1, m + 1)]


def solve_boundary(config: ProblemConfig, op: DiscreteOperator) -> SplitMultipliers:
    """
    Solve the 2m boundary equations for the outer-branch coefficients.

    Args:
        config: Problem configuration
        op: Operator built for the same m and h = 1/N

    Returns:
        SplitMultipliers with the relative residual of the boundary equations
    """
    _check_operator(config, op)
    conv = _Convolver(op, config.N)
    ctx = op.ctx
    m = config.m
    rows = boundary_rows(config)
    matrix = ctx.matrix(2 * m, 2 * m)
    rhs = ctx.matrix(2 * m, 1)
    for i, beta in enumerate(rows):
        fixed = conv.at(beta, conv.left_fixed, conv.right_fixed)
        rhs[i] = -conv.real(fixed, f"boundary equation {beta}")
        for j, generator in enumerate(conv.generators):
            matrix[i, j] = conv.real(conv.left(generator, beta), f"left coefficient ({beta}, {j})")
            matrix[i, m + j] = conv.real(conv.right(generator, beta), f"right coefficient ({beta}, {j})")

    try:
        solution = ctx.lu_solve(matrix, rhs)
    except ZeroDivisionError as e:
        raise SingularSystemError(
            f"boundary system is singular for m={m}, N={config.N}",
            details={"m": m, "N": config.N},
        ) from e

    worst = 0.0
    for i in range(2 * m):
        terms = [matrix[i, j] * solution[j] for j in range(2 * m)]
        magnitude = ctx.fsum(abs(t) for t in terms) + abs(rhs[i])
        defect = abs(ctx.fsum(terms) - rhs[i])
        if magnitude > 0:
            worst = max(worst, float(defect / magnitude))
    if worst > BOUNDARY_RESIDUAL_TOL:
        raise OperatorIntegrityError(
            f"boundary equations residual {worst:.3e} exceeds {BOUNDARY_RESIDUAL_TOL:.0e}",
            details={"m": m, "N": config.N},
        )

    exact = tuple(solution[i] for i in range(2 * m))
    split = SplitMultipliers(
        dminus=MultiplierSet.from_vector([float(v) for v in exact[:m]]),
        dplus=MultiplierSet.from_vector([float(v) for v in exact[m:]]),
        residual=worst,
        exact=exact,
    )
    logger.debug("Boundary system m=%d N=%d solved, residual %.3e", m, config.N, worst)
    return split


def u_function(config: ProblemConfig, split: SplitMultipliers) -> UFunction:
    values = np.asarray(f_value(config.m, config.nodes), dtype=float)
    values.setflags(write=False)
    return UFunction(config, values, split)


def u_value(u: UFunction, beta: int) -> float:
    """u_m(h beta): f_m inside the window, -Q/2m + P(d-) left of it, Q/2m + P(d+) right of it."""
    m, N = u.config.m, u.config.N
    if 0 <= beta <= N:
        return float(u.values[beta])
    x = beta / N
    if beta < 0:
        return -q_value(m, x) / (2 * m) + p_value(m, x, u.multipliers.dminus)
    return q_value(m, x) / (2 * m) + p_value(m, x, u.multipliers.dplus)


def _branches(conv: _Convolver, split: SplitMultipliers) -> tuple[ExpSum, ExpSum]:
    m = conv.op.m
    if len(split.exact) != 2 * m:
        raise InvalidParameterError(f"expected {2 * m} split multipliers, got {len(split.exact)}")
    left = conv.left_fixed + p_terms(conv.ctx, m, split.exact[:m])
    right = conv.right_fixed + p_terms(conv.ctx, m, split.exact[m:])
    return left, right


def residual_at(config: ProblemConfig, op: DiscreteOperator, split: SplitMultipliers, beta: int) -> float:
    """(D_m * u_m)(h beta) for any integer beta; vanishes outside [0, N]."""
    _check_operator(config, op)
    conv = _Convolver(op, config.N)
    left, right = _branches(conv, split)
    return float(conv.real(conv.at(beta, left, right), f"convolution at {beta}"))


def _analytic_weights(conv: _Convolver, left: ExpSum, right: ExpSum) -> np.ndarray:
    """
    Interior weights T + Re sum_n (a_n lambda_n^beta + b_n lambda_n^{N-beta}).

    The geometric form holds for 1 <= beta <= N-1; both end weights are
    evaluated from the general convolution.
    """
    op, ctx, N = conv.op, conv.ctx, conv.N
    near, far = [], []
    for amplitude, root in zip(op.amplitudes, op.roots):
        coefficient = op.scale * amplitude
        near.append(coefficient * ctx.fsum(
            c / (ctx.exp(rate * op.step) - root) for c, rate in left.terms
        ))
        far.append(coefficient * ctx.fsum(
            c * ctx.exp(rate * op.step) ** (N + 1) / (1 - root * ctx.exp(rate * op.step))
            for c, rate in right.terms
        ))

    beta = np.arange(N + 1)
    weights = np.full(N + 1, float(ctx.re(conv.mass)))
    for root, a, b in zip(op.lambdas(), near, far):
        weights += np.real(complex(a) * root ** beta + complex(b) * root ** (N - beta))
    for end in {0, N}:
        weights[end] = float(conv.real(conv.at(end, left, right), f"weight {end}"))
    return weights


def _truncated_weights(conv: _Convolver, left: ExpSum, right: ExpSum) -> np.ndarray:
    """Direct sums over the first G grid points on either side of the window."""
    op, ctx, N = conv.op, conv.ctx, conv.N
    scale = max(left.magnitude(ctx), right.magnitude(ctx))
    reach = op.truncation_index(op.step, scale=scale)
    d = op.exact_values(N + reach)
    outside_left = [left(ctx, -op.step * i) for i in range(1, reach + 1)]
    outside_right = [right(ctx, op.step * (N + i)) for i in range(1, reach + 1)]
    logger.debug("Truncated tails: reach %d on each side", reach)

    weights = np.empty(N + 1)
    for beta in range(N + 1):
        total = conv.mass + ctx.fsum(
            d[beta + i] * outside_left[i - 1] + d[N + i - beta] * outside_right[i - 1]
            for i in range(1, reach + 1)
        )
        weights[beta] = float(conv.real(total, f"weight {beta}"))
    return weights


def weights(
    config: ProblemConfig,
    op: DiscreteOperator,
    tails: str = Tails.ANALYTIC.value,
    split: Optional[SplitMultipliers] = None,
) -> QuadratureRule:
    """
    Recover C_0..C_N from the convolution of D_m with u_m.

    Args:
        config: Problem configuration
        op: Operator for the same m and h = 1/N
        tails: "analytic" (geometric series) or "truncated" (adaptive direct sums)
        split: Boundary solution to reuse; solved here when omitted

    Returns:
        QuadratureRule tagged "sobolev"
    """
    tails = Tails(tails)
    _check_operator(config, op)
    if split is None:
        split = solve_boundary(config, op)
    conv = _Convolver(op, config.N)
    left, right = _branches(conv, split)
    if tails is Tails.ANALYTIC:
        values = _analytic_weights(conv, left, right)
    else:
        values = _truncated_weights(conv, left, right)

    rule = QuadratureRule(config, values, Method.SOBOLEV.value, residual=split.residual)
    defect = float(np.max(np.abs(rule.constraint_residuals())))
    if defect > CONSTRAINT_WARN_TOL:
        message = f"constraint residual {defect:.3e} exceeds {CONSTRAINT_WARN_TOL:.0e}"
        logger.warning(message)
        rule = QuadratureRule(config, values, Method.SOBOLEV.value, residual=split.residual, warnings=(message,))
    return rule


def solve_config(config: ProblemConfig, tails: str = Tails.ANALYTIC.value) -> tuple[QuadratureRule, SplitMultipliers]:
    """Build the operator, solve the boundary system and recover the weights."""
    started = time.perf_counter()
    op = for_grid(config.m, config.N)
    split = solve_boundary(config, op)
    rule = weights(config, op, tails=tails, split=split)
    logger.info(
        "Sobolev weights m=%d N=%d (%s tails) in %.3fs",
        config.m, config.N, Tails(tails).value, time.perf_counter() - started,
    )
    return rule, split
