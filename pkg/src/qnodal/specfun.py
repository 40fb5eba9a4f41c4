"""Bessel functions J0/J1, closed-form moments of the reference laws, and
the small set of quadrature rules the analysis modules share."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import pi

import numpy as np

from .errors import ModeError, OrderError, QuadratureError, RangeError

SERIES_SWITCH = 12.0
SERIES_TERMS = 30
# 10 terms in each of P and Q; 4 are not enough for 1e-10 at the switch point
ASYMPTOTIC_TERMS = 20
MAX_ARGUMENT = 1e6


def _series(order, t):
    half = 0.5 * t
    term = np.ones_like(t) if order == 0 else half.copy()
    total = term.copy()
    z = -half * half
    for k in range(1, SERIES_TERMS):
        term = term * z / (k * (k + order))
        total = total + term
    return total


def _asymptotic(order, t):
    mu = 4.0 * order * order
    p = np.zeros_like(t)
    q = np.zeros_like(t)
    coeff = 1.0
    for k in range(ASYMPTOTIC_TERMS):
        if k > 0:
            coeff *= (mu - (2 * k - 1) ** 2) / (k * 8.0)
        term = coeff / t**k
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p = p + sign * term
        else:
            q = q + sign * term
    chi = t - (0.5 * order + 0.25) * pi
    return np.sqrt(2.0 / (pi * t)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j(order, t):
    """Bessel function of the first kind, order 0 or 1.

    Power series below ``|t| = 12``, Hankel asymptotic expansion above.
    Absolute error is below 2e-12 everywhere, largest at the switch point.
    Accepts scalars or arrays; returns the same shape.
    """
    if order not in (0, 1):
        raise ModeError(f"only orders 0 and 1 are supported, got {order}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > MAX_ARGUMENT):
        raise RangeError(f"|t| exceeds {MAX_ARGUMENT:g}")
    x = np.abs(np.atleast_1d(t_arr))
    out = np.empty_like(x)
    small = x < SERIES_SWITCH
    if np.any(small):
        out[small] = _series(order, x[small])
    if np.any(~small):
        out[~small] = _asymptotic(order, x[~small])
    if order == 1:
        out = np.where(np.atleast_1d(t_arr) < 0, -out, out)
    if t_arr.ndim == 0:
        return float(out[0])
    return out.reshape(t_arr.shape)


def j0(t):
    return bessel_j(0, t)


def j1(t):
    return bessel_j(1, t)


class LawKind(enum.Enum):
    ARCSINE = "arcsine"
    SEMICIRCLE = "semicircle"
    MIXTURE = "mixture"
    POINT_PAIR = "point_pair"


@dataclass(frozen=True)
class ReferenceLaw:
    """A symmetric probability law on [-1, 1].

    ``Mixture(a)`` puts mass ``1 - a`` on the pair {-1, 1} and ``a`` on the
    arcsine law, so ``Mixture(0)`` is the point pair and ``Mixture(1)`` the
    arcsine law.
    """

    kind: LawKind
    a: float = 1.0

    def __post_init__(self):
        if self.kind is LawKind.MIXTURE and not 0.0 <= self.a <= 1.0:
            raise ModeError(f"mixture weight must lie in [0, 1], got {self.a}")

    @classmethod
    def arcsine(cls):
        return cls(LawKind.ARCSINE)

    @classmethod
    def semicircle(cls):
        return cls(LawKind.SEMICIRCLE)

    @classmethod
    def mixture(cls, a):
        return cls(LawKind.MIXTURE, float(a))

    @classmethod
    def point_pair(cls):
        return cls(LawKind.POINT_PAIR)

    @property
    def mixture_weight(self):
        """Arcsine weight when the law is viewed as a member of the mixture family."""
        if self.kind is LawKind.ARCSINE:
            return 1.0
        if self.kind is LawKind.POINT_PAIR:
            return 0.0
        if self.kind is LawKind.MIXTURE:
            return self.a
        return None


def arcsine_moment(m):
    """C(2m, m) / 4**m via the ratio recurrence (no factorials)."""
    value = 1.0
    for j in range(m):
        value *= (2 * j + 1) / (2 * j + 2)
    return value


def semicircle_moment(m):
    """Catalan(m) / 4**m."""
    return arcsine_moment(m) / (m + 1)


def reference_moment(law: ReferenceLaw, m: int) -> float:
    """2m-th moment of ``law``."""
    if m < 0 or m > 64:
        raise OrderError(f"moment index must lie in [0, 64], got {m}")
    if law.kind is LawKind.SEMICIRCLE:
        return semicircle_moment(m)
    a = law.mixture_weight
    if a == 1.0:
        return arcsine_moment(m)
    return (1.0 - a) + a * arcsine_moment(m)


class RuleKind(enum.Enum):
    TRAPEZOID = "trapezoid"
    GAUSS_CHEBYSHEV_FIRST = "gauss_chebyshev_first"
    GAUSS_CHEBYSHEV_SECOND = "gauss_chebyshev_second"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a fixed rule.

    The Chebyshev rules absorb their weight function: the integral of
    ``f(x) (1-x^2)^(-1/2)`` (first kind) or ``f(x) (1-x^2)^(1/2)`` (second
    kind) over [-1, 1] is ``sum(w * f(x))``.  The trapezoid rule covers
    ``[a, b]``; with ``periodic=True`` the right endpoint is dropped.
    """

    kind: RuleKind
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss_chebyshev_first(cls, n):
        j = np.arange(1, n + 1)
        x = np.cos((2 * j - 1) * pi / (2 * n))
        return cls(RuleKind.GAUSS_CHEBYSHEV_FIRST, x, np.full(n, pi / n))

    @classmethod
    def gauss_chebyshev_second(cls, n):
        j = np.arange(1, n + 1)
        theta = j * pi / (n + 1)
        w = pi / (n + 1) * np.sin(theta) ** 2
        return cls(RuleKind.GAUSS_CHEBYSHEV_SECOND, np.cos(theta), w)

    @classmethod
    def trapezoid(cls, a, b, n, periodic=False):
        if periodic:
            x = a + (b - a) * np.arange(n) / n
            w = np.full(n, (b - a) / n)
        else:
            x = np.linspace(a, b, n)
            w = np.full(n, (b - a) / (n - 1))
            w[0] *= 0.5
            w[-1] *= 0.5
        return cls(RuleKind.TRAPEZOID, x, w)

    @property
    def size(self):
        return len(self.nodes)


def integrate(rule: QuadratureRule, f) -> float:
    values = np.asarray(f(rule.nodes), dtype=float)
    if values.shape == ():
        values = np.full(rule.size, float(values))
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = int(bad[0])
        raise QuadratureError(f"non-finite integrand at node {i} (x={rule.nodes[i]!r})", i)
    return float(np.dot(rule.weights, values))


def quadrature_moment(law: ReferenceLaw, m: int, nodes: int = 64) -> float:
    """Independent quadrature route to the arcsine/semicircle moments."""
    if law.kind is LawKind.SEMICIRCLE:
        rule = QuadratureRule.gauss_chebyshev_second(nodes)
        return integrate(rule, lambda x: x ** (2 * m)) * 2.0 / pi
    rule = QuadratureRule.gauss_chebyshev_first(nodes)
    arcsine = integrate(rule, lambda x: x ** (2 * m)) / pi
    a = law.mixture_weight
    return (1.0 - a) + a * arcsine


def semicircle_char(t):
    """Characteristic function 2 J1(t) / t of the semicircle law, 1 at t = 0."""
    t_arr = np.asarray(t, dtype=float)
    safe = np.where(t_arr == 0.0, 1.0, t_arr)
    out = np.where(t_arr == 0.0, 1.0, 2.0 * bessel_j(1, safe) / safe)
    return float(out) if out.ndim == 0 else out


__all__ = [
    "bessel_j", "j0", "j1", "LawKind", "ReferenceLaw", "arcsine_moment",
    "semicircle_moment", "reference_moment", "RuleKind", "QuadratureRule",
    "integrate", "quadrature_moment", "semicircle_char",
]
