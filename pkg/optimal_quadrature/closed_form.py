"""
Explicit optimal weights for m = 1 and m = 3.
"""

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .config import working_dps
from .dense_solver import Method, QuadratureRule
from .errors import SingularSystemError, StabilityError
from .expsum import make_context
from .kernel import ProblemConfig

logger = logging.getLogger(__name__)

WARN_CONDITION = 1e10
SYSTEM_RESIDUAL_TOL = 1e-12
_UNIT_GAP = 1e-12


def weights_m1(N: int) -> QuadratureRule:
    """
    C_0 = C_N = (e^h - 1)/(e^h + 1), C_beta = 2 (e^h - 1)/(e^h + 1) in between.
    """
    config = ProblemConfig(1, N)
    edge = math.tanh(config.h / 2)
    values = np.full(N + 1, 2 * edge)
    values[0] = values[-1] = edge
    return QuadratureRule(config, values, Method.CLOSED_M1.value)


@dataclass(frozen=True)
class M3Parameters:
    """Scalars of the m = 3 weight formulas, rounded to double precision."""
    h: float
    tau1: float
    tau2: float
    T: float
    Kc: float
    K1c: float
    K2c: float
    m1: float
    m2: float
    n1: float
    n2: float
    A11: float
    A12: float
    A21: float
    A22: float
    B11: float
    B12: float
    B21: float
    B22: float
    T1: float
    T2: float
    condition: float

    def to_dict(self) -> dict:
        return asdict(self)


def _inner_root(ctx, t):
    """Root of lambda^2 - t lambda + 1 inside the unit disk."""
    if abs(t) <= 2 + _UNIT_GAP:
        raise StabilityError(
            f"tau lies on the unit circle (t = {float(t):.12g})",
            details={"t": float(t)},
        )
    return (t - ctx.sign(t) * ctx.sqrt(t * t - 4)) / 2


class _M3Solution:
    """Extended-precision evaluation of the m = 3 formulas at h = 1/N."""

    def __init__(self, N: int):
        ctx = make_context(working_dps(3, N))
        self.ctx = ctx
        self.N = N
        h = ctx.mpf(1) / N
        r3 = ctx.sqrt(3)
        cos_half, sin_half = ctx.cos(r3 * h / 2), ctx.sin(r3 * h / 2)
        sinh_h, cosh_h = ctx.sinh(h), ctx.cosh(h)
        self.h = h
        self.eh = ctx.exp(h)
        self.eh2 = ctx.exp(h / 2)

        K = sinh_h + ctx.sinh(h / 2) * cos_half - r3 * ctx.cosh(h / 2) * sin_half
        K1 = 2 * cosh_h + (
            4 * cos_half * ctx.cosh(h / 2) * sinh_h + sinh_h - r3 * ctx.sin(r3 * h) - 2 * sinh_h * cosh_h
        ) / K
        # K2 carries a constant 2 so that lambda^4 - K1 lambda^3 + K2 lambda^2 - K1 lambda + 1
        # factors over the two tau pairs.
        K2 = 2 + (
            2 * ctx.cos(r3 * h) * sinh_h + 4 * sinh_h * cosh_h - 2 * r3 * ctx.sin(r3 * h) * cosh_h
        ) / K
        disc = K1 * K1 - 4 * K2 + 8
        if disc < 0:
            raise StabilityError(
                f"tau are complex: discriminant {float(disc):.6e} < 0",
                details={"N": N},
            )
        root = ctx.sqrt(disc)
        self.taus = [_inner_root(ctx, (K1 + root) / 2), _inner_root(ctx, (K1 - root) / 2)]
        self.K, self.K1, self.K2 = K, K1, K2
        self.T = 24 * (cosh_h - 1) * (cos_half - ctx.cosh(h / 2)) ** 2 / (K * (K2 + 2 - 2 * K1))

        ce, se = self.eh2 * cos_half, self.eh2 * sin_half
        self.A = [[], []]
        self.B = [[], []]
        for tau in self.taus:
            inner = 1 - 2 * tau * ce + tau * tau * self.eh
            outer = tau * tau - 2 * tau * ce + self.eh
            self.A[0].append(tau * se / inner)
            self.A[1].append(self.eh / (self.eh - tau) + (tau * ce - 1) / inner)
            self.B[0].append(tau * se / outer)
            self.B[1].append(self.eh * tau / (self.eh * tau - 1) + (tau * ce - tau * tau) / outer)
        plain = 1 - 2 * ce + self.eh
        T = self.T
        self.rhs = [
            r3 / 2 - T * se / plain,
            ctx.mpf(3) / 2 - T * self.eh / (self.eh - 1) - (T * ce - T) / plain,
        ]
        self._solve()

    def _solve(self) -> None:
        ctx, N = self.ctx, self.N
        far = [tau ** N for tau in self.taus]
        A, B = self.A, self.B
        system = ctx.matrix([
            [A[0][0], A[0][1], far[0] * B[0][0], far[1] * B[0][1]],
            [A[1][0], A[1][1], far[0] * B[1][0], far[1] * B[1][1]],
            [far[0] * A[0][0], far[1] * A[0][1], B[0][0], B[0][1]],
            [far[0] * A[1][0], far[1] * A[1][1], B[1][0], B[1][1]],
        ])
        rhs = ctx.matrix([self.rhs[0], self.rhs[1], self.rhs[0], self.rhs[1]])
        try:
            solution = ctx.lu_solve(system, rhs)
            self.condition = float(ctx.mnorm(system, 1) * ctx.mnorm(ctx.inverse(system), 1))
        except ZeroDivisionError as e:
            raise SingularSystemError(f"m = 3 auxiliary system is singular at N = {N}") from e
        if self.condition > WARN_CONDITION:
            logger.warning("m = 3 auxiliary system condition %.3e exceeds %.0e", self.condition, WARN_CONDITION)
        defect = ctx.mnorm(system * solution - rhs, "inf") / ctx.mnorm(rhs, "inf")
        if defect > SYSTEM_RESIDUAL_TOL:
            raise SingularSystemError(
                f"m = 3 auxiliary system residual {float(defect):.3e}",
                condition=self.condition,
            )
        self.m1, self.m2, self.n1, self.n2 = (solution[i] for i in range(4))

    def end_weights(self) -> tuple[float, float]:
        """C_0 and C_N."""
        ctx, N, eh, T = self.ctx, self.N, self.eh, self.T
        t1, t2 = self.taus
        first = T / (eh - 1) + ctx.fsum([
            self.m1 * t1 / (eh - t1),
            self.m2 * t2 / (eh - t2),
            self.n1 * t1 ** N / (t1 * eh - 1),
            self.n2 * t2 ** N / (t2 * eh - 1),
        ])
        last = T / (eh - 1) + ctx.fsum([
            self.m1 * t1 ** N / (eh - t1),
            self.m2 * t2 ** N / (eh - t2),
            self.n1 * t1 / (t1 * eh - 1),
            self.n2 * t2 / (t2 * eh - 1),
        ])
        return float(1 - first), float(-1 + eh * last)

    def parameters(self) -> M3Parameters:
        (a11, a12), (a21, a22) = self.A
        (b11, b12), (b21, b22) = self.B
        return M3Parameters(
            h=float(self.h),
            tau1=float(self.taus[0]),
            tau2=float(self.taus[1]),
            T=float(self.T),
            Kc=float(self.K),
            K1c=float(self.K1),
            K2c=float(self.K2),
            m1=float(self.m1),
            m2=float(self.m2),
            n1=float(self.n1),
            n2=float(self.n2),
            A11=float(a11), A12=float(a12), A21=float(a21), A22=float(a22),
            B11=float(b11), B12=float(b12), B21=float(b21), B22=float(b22),
            T1=float(self.rhs[0]),
            T2=float(self.rhs[1]),
            condition=self.condition,
        )


def m3_parameters(N: int) -> M3Parameters:
    ProblemConfig(3, N)
    return _M3Solution(N).parameters()


def weights_m3(N: int) -> QuadratureRule:
    """
    C_beta = T + m1 tau1^beta + m2 tau2^beta + n1 tau1^(N-beta) + n2 tau2^(N-beta)
    for 1 <= beta <= N-1, with the end weights given separately.

    Args:
        N: Number of intervals, N >= 2

    Returns:
        QuadratureRule tagged "closed-form-m3" carrying the auxiliary system condition
    """
    config = ProblemConfig(3, N)
    solution = _M3Solution(N)
    params = solution.parameters()
    beta = np.arange(N + 1)
    values = (
        params.T
        + params.m1 * np.power(params.tau1, beta)
        + params.m2 * np.power(params.tau2, beta)
        + params.n1 * np.power(params.tau1, N - beta)
        + params.n2 * np.power(params.tau2, N - beta)
    )
    values[0], values[N] = solution.end_weights()
    logger.debug("m = 3 closed form at N=%d: tau = (%.12g, %.12g)", N, params.tau1, params.tau2)
    return QuadratureRule(config, values, Method.CLOSED_M3.value, condition_estimate=params.condition)
