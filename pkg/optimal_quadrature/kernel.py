"""
Green's function, exactness basis and right-hand sides of the W2^(m,0) problem.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError, InvalidParameterError, SolvabilityError

ArrayLike = Union[float, Sequence[float], np.ndarray]

# Below this radius the power series is used; above it, the exponential form.
SERIES_RADIUS = 4.0
_SERIES_TOL = 1e-17
_MAX_SERIES_TERMS = 400


def check_order(m) -> int:
    """Validate the space order and return it as an int."""
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise InvalidParameterError(f"m must be an integer, got {m!r}")
    if m < 1:
        raise InvalidParameterError(f"m must be positive, got {m}")
    if m % 2 == 0:
        raise InvalidParameterError("m must be odd")
    return int(m)


@dataclass(frozen=True)
class ProblemConfig:
    """Odd order m and N intervals of the uniform grid on [0, 1]."""
    m: int
    N: int

    def __post_init__(self):
        check_order(self.m)
        if isinstance(self.N, bool) or not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise InvalidParameterError(f"N must be a positive integer, got {self.N!r}")
        if self.N + 1 < self.m:
            raise SolvabilityError(
                f"N + 1 >= m is required (m={self.m}, N={self.N})",
                details={"m": self.m, "N": self.N},
            )

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def pairs(self) -> int:
        """Number of exp-cosine / exp-sine pairs, (m - 1) / 2."""
        return (self.m - 1) // 2

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N + 1) / self.N


class BasisKind(str, Enum):
    EXP = "pure-exponential"
    EXP_COS = "exp-cosine"
    EXP_SIN = "exp-sine"


@dataclass(frozen=True)
class BasisFunction:
    """One of e^{ax}, e^{ax}cos(bx), e^{ax}sin(bx)."""
    kind: BasisKind
    a: float
    b: float = 0.0
    k: int = 0  # pair index, 0 for the pure exponential

    def __call__(self, x: ArrayLike):
        x = np.asarray(x, dtype=float)
        growth = np.exp(self.a * x)
        if self.kind is BasisKind.EXP:
            values = growth
        elif self.kind is BasisKind.EXP_COS:
            values = growth * np.cos(self.b * x)
        else:
            values = growth * np.sin(self.b * x)
        return values if values.ndim else float(values)

    @property
    def rate(self) -> complex:
        return complex(self.a, self.b)

    def label(self) -> str:
        if self.kind is BasisKind.EXP:
            return f"exp({self.a:+.6g}x)"
        trig = "cos" if self.kind is BasisKind.EXP_COS else "sin"
        return f"exp({self.a:+.6g}x){trig}({self.b:.6g}x)"


def exactness_basis(m: int) -> list[BasisFunction]:
    """
    The m functions annihilated by the norm, in constraint order.

    e^{-x} first, then for k = 1..(m-1)/2 the pair
    e^{-x cos(2 pi k/m)} cos(x sin(2 pi k/m)), e^{-x cos(2 pi k/m)} sin(x sin(2 pi k/m)).
    """
    m = check_order(m)
    basis = [BasisFunction(BasisKind.EXP, -1.0)]
    cosines = []
    sines = []
    for k in range(1, (m - 1) // 2 + 1):
        theta = 2.0 * math.pi * k / m
        a, b = -math.cos(theta), math.sin(theta)
        cosines.append(BasisFunction(BasisKind.EXP_COS, a, b, k))
        sines.append(BasisFunction(BasisKind.EXP_SIN, a, b, k))
    return basis + cosines + sines


def conjugate_basis(m: int) -> list[BasisFunction]:
    """
    The same basis written with angles (2j-1) pi / m, j = 1..(m-1)/2.

    Member j coincides with pair k = (m+1)/2 - j of exactness_basis.
    """
    m = check_order(m)
    basis = [BasisFunction(BasisKind.EXP, -1.0)]
    cosines = []
    sines = []
    for j in range(1, (m - 1) // 2 + 1):
        phi = (2 * j - 1) * math.pi / m
        k = (m + 1) // 2 - j
        cosines.append(BasisFunction(BasisKind.EXP_COS, math.cos(phi), math.sin(phi), k))
        sines.append(BasisFunction(BasisKind.EXP_SIN, math.cos(phi), math.sin(phi), k))
    return basis + cosines + sines


def g1(m: int, k: int) -> float:
    """Integral over [0,1] of the k-th exp-cosine basis member."""
    theta = 2.0 * math.pi * k / m
    return math.cos(theta) - math.exp(-math.cos(theta)) * math.cos(math.sin(theta) + theta)


def g2(m: int, k: int) -> float:
    """Integral over [0,1] of the k-th exp-sine basis member."""
    theta = 2.0 * math.pi * k / m
    return math.sin(theta) - math.exp(-math.cos(theta)) * math.sin(math.sin(theta) + theta)


def basis_integral(b: BasisFunction) -> float:
    """Exact integral of a basis member over [0, 1]."""
    if b.kind is BasisKind.EXP:
        return math.expm1(b.a) / b.a if b.a != 0.0 else 1.0
    # members satisfy a = -cos(theta), b = sin(theta)
    theta = math.atan2(b.b, -b.a)
    scale = math.exp(b.a)
    if b.kind is BasisKind.EXP_COS:
        return math.cos(theta) - scale * math.cos(b.b + theta)
    return math.sin(theta) - scale * math.sin(b.b + theta)


def _power_series(y: np.ndarray, first: int, step: int) -> np.ndarray:
    """Sum of y^p / p! over p = first, first + step, ... for y >= 0."""
    term = y ** first / math.factorial(first)
    total = term.copy()
    power = first
    y_step = y ** step
    for _ in range(_MAX_SERIES_TERMS):
        if np.all(term <= _SERIES_TOL * total):
            break
        term = term * y_step / math.prod(range(power + 1, power + step + 1))
        power += step
        total = total + term
    return total


def _green_closed(m: int, ax: np.ndarray) -> np.ndarray:
    total = np.sinh(ax)
    for n in range(1, m):
        angle = math.pi * n / m
        total = total + np.exp(ax * math.cos(angle)) * np.cos(ax * math.sin(angle) + angle)
    return total / (2 * m)


def green_value(m: int, x: ArrayLike):
    """
    Green's function of d^{2m}/dx^{2m} - 1.

    G_m(x) = sgn(x)/(2m) [sinh x + sum_{n=1}^{m-1} e^{x cos(pi n/m)} cos(x sin(pi n/m) + pi n/m)],
    with sgn(0) = 0. Near the origin the equivalent series
    (1/2) sum_k |x|^{2mk-1} / (2mk-1)! is summed instead.
    """
    m = check_order(m)
    arr = np.asarray(x, dtype=float)
    ax = np.abs(np.atleast_1d(arr))
    out = np.empty_like(ax)
    near = ax <= SERIES_RADIUS
    out[near] = 0.5 * _power_series(ax[near], 2 * m - 1, 2 * m)
    far = ~near
    if np.any(far):
        out[far] = _green_closed(m, ax[far])
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def _green_antiderivative(m: int, y: np.ndarray) -> np.ndarray:
    """F(y) = integral of G_m from 0 to y, for y >= 0."""
    out = np.empty_like(y)
    near = y <= SERIES_RADIUS
    out[near] = 0.5 * _power_series(y[near], 2 * m, 2 * m)
    far = ~near
    if np.any(far):
        yf = y[far]
        total = np.zeros_like(yf)
        for n in range(m):
            angle = math.pi * n / m
            total = total + np.cosh(yf * math.cos(angle)) * np.cos(yf * math.sin(angle))
        out[far] = total / (2 * m) - 0.5
    return out


def _odd_antiderivative(m: int, y: np.ndarray) -> np.ndarray:
    return np.sign(y) * _green_antiderivative(m, np.abs(y))


def f_value(m: int, x: ArrayLike):
    """f_m(x) = integral over t in [0,1] of G_m(t - x)."""
    m = check_order(m)
    arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(arr)
    out = _odd_antiderivative(m, flat) + _odd_antiderivative(m, 1.0 - flat)
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def green_double_integral(m: int) -> float:
    """
    Double integral of G_m(x - y) over the unit square.

    Integrating f_m once more gives (1/2m) sum_{w^{2m}=1} (e^w - 1)/w - 1,
    whose real form is evaluated here.
    """
    m = check_order(m)
    terms = []
    for j in range(2 * m):
        phi = math.pi * j / m
        terms.append(math.exp(math.cos(phi)) * math.cos(math.sin(phi) - phi))
    return math.fsum(terms) / (2 * m) - 1.0


def q_value(m: int, x: ArrayLike):
    """
    Tail function Q of the piecewise u_m.

    Q(x) = (1/2) e^x (1 - e^{-1})
           + sum_k e^{x cos(2 pi k/m)} [cos(x sin(2 pi k/m)) - e^{-cos(2 pi k/m)} cos((x-1) sin(2 pi k/m))]
    """
    m = check_order(m)
    x = np.asarray(x, dtype=float)
    total = 0.5 * np.exp(x) * (1.0 - math.exp(-1.0))
    for k in range(1, (m - 1) // 2 + 1):
        theta = 2.0 * math.pi * k / m
        c, s = math.cos(theta), math.sin(theta)
        total = total + np.exp(x * c) * (np.cos(x * s) - math.exp(-c) * np.cos((x - 1.0) * s))
    return total if total.ndim else float(total)


@dataclass(frozen=True)
class MultiplierSet:
    """Coefficients d0, d1[k], d2[k] of P (Lagrange multipliers or tail coefficients)."""
    d0: float
    d1: tuple[float, ...] = ()
    d2: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.d1) != len(self.d2):
            raise DimensionError(
                f"d1 and d2 must have equal length, got {len(self.d1)} and {len(self.d2)}"
            )

    @property
    def order(self) -> int:
        return 1 + 2 * len(self.d1)

    def as_vector(self) -> np.ndarray:
        return np.array([self.d0, *self.d1, *self.d2], dtype=float)

    @classmethod
    def from_vector(cls, values: Sequence[float]) -> "MultiplierSet":
        values = [float(v) for v in values]
        if len(values) % 2 == 0:
            raise DimensionError(f"multiplier vector must have odd length, got {len(values)}")
        pairs = (len(values) - 1) // 2
        return cls(values[0], tuple(values[1:1 + pairs]), tuple(values[1 + pairs:]))

    def to_dict(self) -> dict:
        return {"d0": self.d0, "d1": list(self.d1), "d2": list(self.d2)}


def p_value(m: int, x: ArrayLike, mult: MultiplierSet):
    """P(x) = d0 e^{-x} + sum_k e^{-x cos(2 pi k/m)} [d1_k cos(x sin(2 pi k/m)) + d2_k sin(x sin(2 pi k/m))]."""
    m = check_order(m)
    if mult.order != m:
        raise DimensionError(f"expected {m} multipliers, got {mult.order}")
    x = np.asarray(x, dtype=float)
    total = mult.d0 * np.exp(-x)
    for k in range(1, (m - 1) // 2 + 1):
        theta = 2.0 * math.pi * k / m
        c, s = math.cos(theta), math.sin(theta)
        decay = np.exp(-x * c)
        total = total + decay * (mult.d1[k - 1] * np.cos(x * s) + mult.d2[k - 1] * np.sin(x * s))
    return total if total.ndim else float(total)
