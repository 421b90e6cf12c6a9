"""
Discrete analogue D_m of the operator d^{2m}/dx^{2m} - 1 on the grid h*beta.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from .config import working_dps
from .errors import (
    DegenerateStepError,
    InvalidParameterError,
    OperatorIntegrityError,
    RootPairingError,
)
from .expsum import green_mp, make_context
from .kernel import check_order

logger = logging.getLogger(__name__)

UNIT_CIRCLE_GAP = 1e-8
PAIRING_TOL = 1e-10
REALITY_TOL = 1e-10
TAIL_TOL = 1e-16
_NEWTON_STEPS = 100
_MAX_TRUNCATION = 100_000

Step = Union[float, Fraction]


def _poly_mul(ctx, p: Sequence, q: Sequence) -> list:
    """Product of ascending coefficient lists."""
    out = [ctx.mpf(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_add(ctx, p: Sequence, q: Sequence) -> list:
    size = max(len(p), len(q))
    return [
        (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
        for i in range(size)
    ]


def _horner(coeffs: Sequence, z):
    """Value and derivative of an ascending coefficient list at z."""
    value = 0
    slope = 0
    for c in reversed(coeffs):
        slope = slope * z + value
        value = value * z + c
    return value, slope


@dataclass(frozen=True)
class OperatorCoefficients:
    """a1[k], a2[k], b1[k], b2[k] for k = 1..(m-1)/2 at step h."""
    h: float
    a1: tuple
    a2: tuple
    b1: tuple
    b2: tuple

    @classmethod
    def compute(cls, ctx, m: int, step) -> "OperatorCoefficients":
        a1, a2, b1, b2 = [], [], [], []
        for k in range(1, (m - 1) // 2 + 1):
            angle = ctx.pi * k / m
            c, s = ctx.cos(angle), ctx.sin(angle)
            hc, hs = step * c, step * s
            a1.append(2 * (c * ctx.cos(hs) * ctx.sinh(hc) - s * ctx.sin(hs) * ctx.cosh(hc)))
            a2.append(-2 * (c * ctx.sinh(2 * hc) - s * ctx.sin(2 * hs)))
            b1.append(-4 * ctx.cos(hs) * ctx.cosh(hc))
            b2.append(2 * (1 + ctx.cos(2 * hs) + ctx.cosh(2 * hc)))
        return cls(float(step), tuple(a1), tuple(a2), tuple(b1), tuple(b2))

    def as_floats(self) -> dict[str, list[float]]:
        return {
            name: [float(v) for v in getattr(self, name)]
            for name in ("a1", "a2", "b1", "b2")
        }


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """
    D_m(h beta) = (m/K) * { sum_n A_n lambda_n^{|beta|-1}   |beta| >= 2
                            1 + sum_n A_n                     |beta| = 1
                            M1 - K1/K + sum_n A_n / lambda_n  beta = 0 }

    All data is held in the operator's private mpmath context.
    """
    m: int
    h: float
    step: Any
    ctx: Any
    coefficients: OperatorCoefficients
    roots: tuple
    amplitudes: tuple
    K: Any
    K1: Any
    M1: Any
    poly_b: tuple
    poly_p: tuple

    @property
    def scale(self):
        """The prefactor m / K."""
        return self.m / self.K

    @property
    def decay(self) -> float:
        """Largest root modulus, the geometric decay rate of D_m."""
        return float(max(abs(r) for r in self.roots)) if self.roots else 0.0

    def lambdas(self) -> np.ndarray:
        return np.array([complex(r) for r in self.roots])

    def exact_value(self, beta: int):
        """D_m(h beta) as an mpmath complex number."""
        ctx = self.ctx
        b = abs(beta)
        if b >= 2:
            total = ctx.fsum(a * r ** (b - 1) for a, r in zip(self.amplitudes, self.roots))
        elif b == 1:
            total = 1 + ctx.fsum(self.amplitudes)
        else:
            total = self.M1 - self.K1 / self.K + ctx.fsum(
                a / r for a, r in zip(self.amplitudes, self.roots)
            )
        return self.scale * total

    def value(self, beta: int) -> float:
        """D_m(h beta), with the imaginary rounding residue checked and dropped."""
        raw = self.exact_value(beta)
        real, imag = self.ctx.re(raw), self.ctx.im(raw)
        if abs(imag) > REALITY_TOL * (1 + abs(real)):
            raise OperatorIntegrityError(
                f"D_m({beta}) has imaginary part {float(imag):.3e}",
                details={"beta": beta},
            )
        return float(real)

    def half_line_sum(self, start: int, w):
        """Sum of D_m(h gamma) w^gamma over gamma >= start, in closed form."""
        ctx = self.ctx
        total = ctx.mpf(0)
        if start < 2:
            total += ctx.fsum(self.exact_value(g) * w ** g for g in range(start, 2))
            start = 2
        for a, r in zip(self.amplitudes, self.roots):
            ratio = r * w
            if abs(ratio) >= 1:
                raise OperatorIntegrityError(
                    f"half-line sum diverges: |lambda * w| = {float(abs(ratio)):.6f} >= 1"
                )
            total += self.scale * a * r ** (start - 1) * w ** start / (1 - ratio)
        return total

    def total_mass(self):
        """Sum of D_m(h gamma) over all gamma."""
        return self.exact_value(0) + 2 * self.half_line_sum(1, self.ctx.mpf(1))

    def truncation_index(self, growth, scale=1, reference=1) -> int:
        """
        Smallest G >= 1 such that sum_{|gamma| > G} |D_m(h gamma)| * scale * e^{growth |gamma|}
        stays below TAIL_TOL * reference.
        """
        ctx = self.ctx
        if not self.roots:
            return 1
        rho = max(abs(r) for r in self.roots)
        ratio = rho * ctx.exp(growth)
        if ratio >= 1:
            raise OperatorIntegrityError(
                f"tail does not converge: decay {float(rho):.6f} against growth e^{float(growth):.6f}",
                details={"decay": float(rho), "growth": float(growth)},
            )
        amplitude = abs(self.scale) * ctx.fsum(abs(a) for a in self.amplitudes)
        bound = 2 * amplitude * scale * ctx.exp(growth) / (1 - ratio)
        limit = TAIL_TOL * reference
        gamma = 1
        while bound * ratio ** gamma > limit:
            gamma += 1
            if gamma > _MAX_TRUNCATION:
                raise OperatorIntegrityError("tail truncation index exceeds limit")
        return gamma

    def exact_values(self, count: int) -> list:
        """D_m(h gamma) for gamma = 0..count, powers accumulated incrementally."""
        ctx = self.ctx
        values = [self.exact_value(g) for g in range(min(count, 1) + 1)]
        powers = list(self.roots)
        for _ in range(2, count + 1):
            values.append(self.scale * ctx.fsum(a * p for a, p in zip(self.amplitudes, powers)))
            powers = [p * r for p, r in zip(powers, self.roots)]
        return values

    def decay_bound_ratio(self, reach: int = 100) -> float:
        """Max over 2 <= |beta| <= reach of |D_m(h beta)| / ((m/K) sum|A_n| rho^{|beta|-1}); at most 1."""
        if not self.roots:
            return 0.0
        ctx = self.ctx
        rho = max(abs(r) for r in self.roots)
        amplitude = abs(self.scale) * ctx.fsum(abs(a) for a in self.amplitudes)
        values = self.exact_values(reach)
        return float(max(abs(values[b]) / (amplitude * rho ** (b - 1)) for b in range(2, reach + 1)))

    def imaginary_residual(self, reach: int = 100) -> float:
        """Largest |Im D_m| / (1 + |Re D_m|) over 0 <= |beta| <= reach."""
        ctx = self.ctx
        return float(max(
            abs(ctx.im(v)) / (1 + abs(ctx.re(v))) for v in self.exact_values(reach)
        ))

    def verify_delta(self, window: int) -> float:
        """Max over |beta| <= window of |(D_m * G_m)(h beta) - delta_beta0|."""
        self._check_window(window)
        ctx = self.ctx
        reach = self.truncation_index(self.step, scale=ctx.exp(self.step * window) / 2)
        d = self.exact_values(reach)
        green = [green_mp(ctx, self.m, self.step * j) for j in range(window + reach + 1)]
        worst = ctx.mpf(0)
        for beta in range(-window, window + 1):
            total = ctx.fsum(
                d[abs(g)] * green[abs(beta - g)] for g in range(-reach, reach + 1)
            )
            worst = max(worst, abs(total - (1 if beta == 0 else 0)))
        logger.debug("delta identity: m=%d h=%g reach=%d residual=%.3e", self.m, self.h, reach, float(worst))
        return float(worst)

    def annihilation_residuals(self, window: int) -> dict[str, float]:
        """Normalized residual of D_m * phi for each function the operator annihilates."""
        self._check_window(window)
        ctx = self.ctx
        reach = self.truncation_index(self.step, scale=ctx.exp(self.step * window))
        d = self.exact_values(reach)
        span = range(-(window + reach), window + reach + 1)

        functions = {}
        for sign, label in ((1, "+"), (-1, "-")):
            functions[f"exp({label}x)"] = [ctx.exp(sign * self.step * j) for j in span]
            for k in range(1, (self.m - 1) // 2 + 1):
                theta = 2 * ctx.pi * k / self.m
                c, s = ctx.cos(theta), ctx.sin(theta)
                growth = [ctx.exp(sign * self.step * j * c) for j in span]
                functions[f"exp({label}x cos)cos[k={k}]"] = [
                    g * ctx.cos(self.step * j * s) for g, j in zip(growth, span)
                ]
                functions[f"exp({label}x cos)sin[k={k}]"] = [
                    g * ctx.sin(self.step * j * s) for g, j in zip(growth, span)
                ]

        offset = window + reach
        residuals = {}
        for name, samples in functions.items():
            peak = max(abs(v) for v in samples)
            worst = ctx.mpf(0)
            for beta in range(-window, window + 1):
                total = ctx.fsum(
                    d[abs(g)] * samples[beta - g + offset] for g in range(-reach, reach + 1)
                )
                worst = max(worst, abs(total))
            residuals[name] = float(worst / peak)
        return residuals

    def verify_annihilation(self, window: int) -> float:
        """Largest normalized residual over the 2m annihilated functions."""
        return max(self.annihilation_residuals(window).values())

    def pairing_residual(self) -> float:
        """Max of |P(1/lambda_n)| / max|coeff| over stored roots."""
        if not self.roots:
            return 0.0
        top = max(abs(c) for c in self.poly_p)
        return float(max(abs(_horner(self.poly_p, 1 / r)[0]) for r in self.roots) / top)

    def _check_window(self, window: int) -> None:
        if window < 2 * self.m:
            raise InvalidParameterError(f"window must be at least 2m = {2 * self.m}, got {window}")


def _exact_step(ctx, h: Step):
    if isinstance(h, Fraction):
        return ctx.mpf(h.numerator) / h.denominator
    return ctx.mpf(h)


def _locate_roots(ctx, coeffs: list) -> list:
    """All roots of an ascending coefficient list: companion eigenvalues, Newton-polished."""
    monic = [float(c / coeffs[-1]) for c in coeffs]
    seeds = np.linalg.eigvals(npoly.polycompanion(monic))
    scale = max(abs(c) for c in coeffs)
    tolerance = ctx.mpf(10) ** (-(ctx.dps - 6))
    polished = []
    for seed in seeds:
        z = ctx.mpc(complex(seed))
        for _ in range(_NEWTON_STEPS):
            value, slope = _horner(coeffs, z)
            if slope == 0:
                raise RootPairingError(f"vanishing derivative while polishing root {seed}")
            correction = value / slope
            z -= correction
            if abs(correction) <= tolerance * max(abs(z), 1):
                break
        else:
            raise RootPairingError(f"Newton polish did not converge from {seed}")
        # |P(z)| grows like |z|^degree away from the disk
        reach = max(abs(z), 1) ** (len(coeffs) - 1)
        if abs(_horner(coeffs, z)[0]) > tolerance * scale * reach * 1e6:
            raise RootPairingError(f"polished root {complex(z)} leaves residual")
        polished.append(z)
    return polished


def build(m: int, h: Step, dps: Optional[int] = None) -> DiscreteOperator:
    """
    Construct D_m for step h.

    Args:
        m: Odd space order
        h: Step in (0, 1]; a Fraction is converted exactly
        dps: Decimal digits of the private context (defaults to working_dps)

    Returns:
        DiscreteOperator with the m-1 roots inside the unit disk and their amplitudes
    """
    m = check_order(m)
    if not 0 < float(h) <= 1:
        raise InvalidParameterError(f"h must lie in (0, 1], got {h}")
    if dps is None:
        dps = working_dps(m, max(int(round(1 / float(h))), 1))
    ctx = make_context(dps)
    step = _exact_step(ctx, h)
    coefficients = OperatorCoefficients.compute(ctx, m, step)
    cosh_h, sinh_h = ctx.cosh(step), ctx.sinh(step)
    pairs = (m - 1) // 2

    quartics = [[1, b1, b2, b1, 1] for b1, b2 in zip(coefficients.b1, coefficients.b2)]
    poly_b = [ctx.mpf(1)]
    for quartic in quartics:
        poly_b = _poly_mul(ctx, poly_b, quartic)
    rational_part = [ctx.mpf(0)]
    for j in range(pairs):
        term = [coefficients.a1[j], coefficients.a2[j], coefficients.a1[j]]
        for i, quartic in enumerate(quartics):
            if i != j:
                term = _poly_mul(ctx, term, quartic)
        rational_part = _poly_add(ctx, rational_part, term)
    factor = [ctx.mpf(1), -2 * cosh_h, ctx.mpf(1)]
    poly_p = _poly_add(ctx, [sinh_h * c for c in poly_b], _poly_mul(ctx, factor, rational_part))
    leftover = max((abs(c) for c in poly_p[2 * m - 1 :]), default=0)
    if leftover > 1e-12 * max(abs(c) for c in poly_p[: 2 * m - 1]):
        raise OperatorIntegrityError(
            f"symbol polynomial has degree above {2 * m - 2} (leftover {float(leftover):.2e})",
            details={"m": m, "h": float(h)},
        )
    poly_p = poly_p[: 2 * m - 1]
    poly_n = _poly_mul(ctx, factor, poly_b)

    K = sinh_h + ctx.fsum(coefficients.a1)
    K1 = ctx.fsum(
        coefficients.b1[k] * sinh_h
        + coefficients.a2[k]
        + coefficients.a1[k] * (ctx.fsum(coefficients.b1[j] for j in range(pairs) if j != k) - 2 * cosh_h)
        for k in range(pairs)
    )
    M1 = ctx.fsum(coefficients.b1) - 2 * cosh_h

    top = max(abs(c) for c in poly_p)
    if abs(poly_p[-1] - K) > 1e-12 * top:
        raise OperatorIntegrityError("leading coefficient of the symbol polynomial differs from K")
    if m > 1 and abs(poly_p[-2] - K1) > 1e-12 * top:
        raise OperatorIntegrityError("second coefficient of the symbol polynomial differs from K1")
    asymmetry = max(abs(poly_p[i] - poly_p[-1 - i]) for i in range(len(poly_p)))
    if asymmetry > 1e-12 * top:
        raise OperatorIntegrityError(f"symbol polynomial is not palindromic ({float(asymmetry / top):.2e})")

    roots, amplitudes = [], []
    if m > 1:
        located = sorted(_locate_roots(ctx, poly_p), key=abs)
        for r in located:
            if abs(abs(r) - 1) <= UNIT_CIRCLE_GAP:
                raise DegenerateStepError(
                    f"operator root {complex(r)} lies within {UNIT_CIRCLE_GAP} of the unit circle",
                    details={"m": m, "h": float(h)},
                )
        inner = [r for r in located if abs(r) < 1]
        if len(inner) != m - 1:
            raise RootPairingError(
                f"expected {m - 1} roots inside the unit disk, found {len(inner)}",
                details={"moduli": [float(abs(r)) for r in located]},
            )
        for a, b in zip(inner, inner[1:]):
            if abs(a - b) <= PAIRING_TOL * max(abs(a), 1e-300):
                raise RootPairingError("repeated operator root")
        monic = [c / K for c in poly_p]
        for r in inner:
            value, _ = _horner(poly_n, r)
            _, slope = _horner(monic, r)
            roots.append(r)
            amplitudes.append(value / (r * slope))

    op = DiscreteOperator(
        m=m,
        h=float(h),
        step=step,
        ctx=ctx,
        coefficients=coefficients,
        roots=tuple(roots),
        amplitudes=tuple(amplitudes),
        K=K,
        K1=K1,
        M1=M1,
        poly_b=tuple(poly_b),
        poly_p=tuple(poly_p),
    )
    if op.pairing_residual() > PAIRING_TOL:
        raise RootPairingError(f"reciprocal pairing residual {op.pairing_residual():.3e}")
    logger.debug(
        "Built D_%d at h=%g (%d digits): roots %s",
        m, float(h), dps, [f"{complex(r):.6g}" for r in roots],
    )
    return op


def for_grid(m: int, N: int, dps: Optional[int] = None) -> DiscreteOperator:
    """Operator for the grid with N intervals on [0, 1] (h = 1/N exactly)."""
    if dps is None:
        dps = working_dps(m, N)
    return build(m, Fraction(1, N), dps)


def float_coefficients(op: DiscreteOperator) -> dict[str, Any]:
    """Summary of the operator in double precision."""
    return {
        "m": op.m,
        "h": op.h,
        "K": float(op.K),
        "K1": float(op.K1),
        "M1": float(op.M1),
        "roots": [complex(r) for r in op.roots],
        "amplitudes": [complex(a) for a in op.amplitudes],
        "poly_b": [float(c) for c in op.poly_b],
        "poly_p": [float(c) for c in op.poly_p],
        **op.coefficients.as_floats(),
    }
