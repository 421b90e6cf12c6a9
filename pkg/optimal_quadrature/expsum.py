"""
Exponential sums and extended-precision evaluators of the kernel functions.

Every function of the problem that lives outside the grid window (the Green's
function on a half-line, f_m on [0,1], Q, P) is a finite sum c_j e^{r_j x}.
The Sobolev solver convolves these sums against the discrete operator in
closed form, so they are kept here as explicit (coefficient, rate) lists.
"""

import logging
from dataclasses import dataclass
from typing import Any, Sequence

import mpmath

from .kernel import BasisKind, SERIES_RADIUS

logger = logging.getLogger(__name__)


def make_context(dps: int) -> mpmath.MPContext:
    """Private mpmath context; keeps precision changes local to one computation."""
    ctx = mpmath.MPContext()
    ctx.dps = dps
    return ctx


@dataclass(frozen=True)
class ExpSum:
    """Finite sum of c * e^{r x} with (c, r) complex."""
    terms: tuple[tuple[Any, Any], ...] = ()

    def __add__(self, other: "ExpSum") -> "ExpSum":
        return ExpSum(self.terms + other.terms)

    def __neg__(self) -> "ExpSum":
        return self.scaled(-1)

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-other)

    def scaled(self, factor) -> "ExpSum":
        return ExpSum(tuple((factor * c, r) for c, r in self.terms))

    def __call__(self, ctx: mpmath.MPContext, x):
        return ctx.fsum(c * ctx.exp(r * x) for c, r in self.terms)

    def magnitude(self, ctx: mpmath.MPContext):
        """Sum of |c|; bounds |value(x)| / e^{|x| max|Re r|}."""
        return ctx.fsum(abs(c) for c, _ in self.terms)


def unit_roots(ctx: mpmath.MPContext, n: int) -> list:
    """The n-th roots of unity e^{2 pi i j / n}, j = 0..n-1."""
    return [ctx.expjpi(ctx.mpf(2 * j) / n) for j in range(n)]


def green_terms(ctx: mpmath.MPContext, m: int) -> ExpSum:
    """G_m(x) for x >= 0: (1/4m) sum over 2m-th roots w of w e^{w x}."""
    return ExpSum(tuple((w / (4 * m), w) for w in unit_roots(ctx, 2 * m)))


def interior_terms(ctx: mpmath.MPContext, m: int) -> ExpSum:
    """f_m(x) on [0, 1]: (1/4m) sum_w (1 + e^{-w}) e^{w x} - 1."""
    terms = [((1 + ctx.exp(-w)) / (4 * m), w) for w in unit_roots(ctx, 2 * m)]
    terms.append((ctx.mpf(-1), ctx.mpf(0)))
    return ExpSum(tuple(terms))


def q_terms(ctx: mpmath.MPContext, m: int) -> ExpSum:
    """Q(x) = (1/2) sum over m-th roots mu of (1 - e^{-mu}) e^{mu x}."""
    return ExpSum(tuple(((1 - ctx.exp(-mu)) / 2, mu) for mu in unit_roots(ctx, m)))


def p_terms(ctx: mpmath.MPContext, m: int, vector: Sequence) -> ExpSum:
    """
    P(x) for the coefficient vector (d0, d1[1..K], d2[1..K]).

    d0 sits on rate -1; the pair k contributes (d1 - i d2)/2 on rate -e^{-i theta}
    and its conjugate on -e^{i theta}, theta = 2 pi k/m.
    """
    pairs = (m - 1) // 2
    unit = ctx.mpc(0, 1)
    terms = [(vector[0], ctx.mpf(-1))]
    for k in range(1, pairs + 1):
        rate = -ctx.expjpi(ctx.mpf(-2 * k) / m)
        d1, d2 = vector[k], vector[pairs + k]
        terms.append(((d1 - unit * d2) / 2, rate))
        terms.append(((d1 + unit * d2) / 2, ctx.conj(rate)))
    return ExpSum(tuple(terms))


def p_generators(ctx: mpmath.MPContext, m: int) -> list[ExpSum]:
    """P for each unit coefficient vector, in (d0, d1, d2) order."""
    generators = []
    for j in range(m):
        unit = [ctx.mpf(0)] * m
        unit[j] = ctx.mpf(1)
        generators.append(p_terms(ctx, m, unit))
    return generators


def _power_series(ctx: mpmath.MPContext, y, first: int, step: int):
    term = y ** first / ctx.factorial(first)
    total = term
    power = first
    y_step = y ** step
    while term > ctx.eps * total:
        term = term * y_step / ctx.fprod(range(power + 1, power + step + 1))
        power += step
        total += term
    return total


def green_mp(ctx: mpmath.MPContext, m: int, x):
    """G_m(x) in the context's precision."""
    ax = abs(ctx.mpf(x))
    if ax == 0:
        return ctx.mpf(0)
    if ax <= SERIES_RADIUS:
        return _power_series(ctx, ax, 2 * m - 1, 2 * m) / 2
    return ctx.re(green_terms(ctx, m)(ctx, ax))


def antiderivative_mp(ctx: mpmath.MPContext, m: int, y):
    """Odd extension of the integral of G_m from 0 to y."""
    y = ctx.mpf(y)
    ay = abs(y)
    if ay == 0:
        return ctx.mpf(0)
    if ay <= SERIES_RADIUS:
        value = _power_series(ctx, ay, 2 * m, 2 * m) / 2
    else:
        roots = unit_roots(ctx, 2 * m)
        value = ctx.re(ctx.fsum(ctx.exp(w * ay) for w in roots)) / (4 * m) - ctx.mpf(1) / 2
    return value if y > 0 else -value


def f_mp(ctx: mpmath.MPContext, m: int, x):
    """f_m(x) in the context's precision."""
    x = ctx.mpf(x)
    return antiderivative_mp(ctx, m, x) + antiderivative_mp(ctx, m, 1 - x)


def exact_basis(ctx: mpmath.MPContext, m: int) -> list[tuple[BasisKind, Any]]:
    """
    Exactness basis with rates computed in the context's precision.

    Returns (kind, rate) with rate = -e^{-2 pi i k/m}, so the member is
    Re or Im of e^{rate x}.
    """
    pairs = (m - 1) // 2
    rates = [-ctx.expjpi(ctx.mpf(-2 * k) / m) for k in range(1, pairs + 1)]
    basis = [(BasisKind.EXP, ctx.mpc(-1))]
    basis += [(BasisKind.EXP_COS, r) for r in rates]
    basis += [(BasisKind.EXP_SIN, r) for r in rates]
    return basis


def exact_basis_value(ctx: mpmath.MPContext, kind: BasisKind, rate, x):
    value = ctx.exp(rate * x)
    return ctx.im(value) if kind is BasisKind.EXP_SIN else ctx.re(value)


def exact_basis_integral(ctx: mpmath.MPContext, kind: BasisKind, rate):
    value = ctx.expm1(rate) / rate
    return ctx.im(value) if kind is BasisKind.EXP_SIN else ctx.re(value)
