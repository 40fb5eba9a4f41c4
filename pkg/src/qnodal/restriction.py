"""Windowed boundary traces with their derivative moments, plus the
pairing-growth diagnostic.

Traces are sampled at cell midpoints of a curve segment.  Because the window
has compact support inside the segment, the trace extends by zero to a smooth
periodic function and trigonometric differentiation of the zero-padded samples
is spectrally accurate.
"""
from __future__ import annotations

import enum
from functools import lru_cache
from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate as sint

from .errors import FitError, OrderError, ParityError, ResolutionError, WindowError
from .geometry import CurveSegment
from .specfun import arcsine_moment
from .spectra import (SAMPLES_PER_WAVELENGTH, Eigenfunction, Parity, min_samples,
                      normal_derivative_on_curve, restrict_to_curve)

MAX_ORDER = 12
SPECTRAL_MIN_SAMPLES = 256
DEFAULT_SAMPLES = 4096

# 8th-order central first-derivative stencil (offsets 1..4)
_FD8 = np.array([4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _bump_polynomials(jmax):
    """P_j with d^j/dz^j exp(-1/(1-z^2)) = exp(-1/(1-z^2)) P_j(z) / (1-z^2)^(2j)."""
    one_minus = Polynomial([1.0, 0.0, -1.0])
    z = Polynomial([0.0, 1.0])
    polys = [Polynomial([1.0])]
    for j in range(jmax):
        p = polys[-1]
        polys.append(p.deriv() * one_minus**2 + p * (4 * j * z * one_minus - 2 * z))
    return polys


_POLYS = _bump_polynomials(MAX_ORDER)


def bump_derivative(z, j=0):
    """j-th derivative of exp(1 - 1/(1-z^2)) in z; zero outside (-1, 1)."""
    if not 0 <= j <= MAX_ORDER:
        raise OrderError(f"bump derivatives are available up to order {MAX_ORDER}")
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    inside = np.abs(z) < 1
    zi = z[inside]
    q = 1.0 - zi * zi
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        # exp(1 - 1/q) / q^(2j) evaluated in log form to avoid 0 * inf near |z| = 1
        mag = np.exp(1.0 - 1.0 / q - 2 * j * np.log(q))
    out[inside] = mag * _POLYS[j](zi)
    return out


@dataclass(frozen=True)
class WindowFunction:
    """Smooth bump f(s) = exp(1 - 1/(1 - z^2)), z = 2 (s - center) / width."""

    length: float
    center: float
    width: float
    norm_sq: float
    segment: CurveSegment | None = field(default=None, repr=False, compare=False)

    def __call__(self, s):
        return bump_derivative(2 * (np.asarray(s, dtype=float) - self.center) / self.width, 0)

    def derivative(self, s, j):
        z = 2 * (np.asarray(s, dtype=float) - self.center) / self.width
        return bump_derivative(z, j) * (2.0 / self.width) ** j


@lru_cache(maxsize=None)
def bump_square_integral():
    """Integral of exp(2 - 2/(1 - z^2)) over (-1, 1)."""
    val, _ = sint.quad(lambda z: 2.0 * np.exp(2.0 - 2.0 / (1.0 - z * z)), 0.0, 1.0,
                       epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def make_window(segment, center: float, width: float) -> WindowFunction:
    """Window on a segment (or a bare length).  The support must lie in [0, L]."""
    length = segment.length if isinstance(segment, CurveSegment) else float(segment)
    if width <= 0 or center - 0.5 * width < 0 or center + 0.5 * width > length:
        raise WindowError(f"support [{center - width / 2:g}, {center + width / 2:g}] "
                          f"leaves the segment [0, {length:g}]")
    norm_sq = 0.5 * width * bump_square_integral()
    seg = segment if isinstance(segment, CurveSegment) else None
    return WindowFunction(length, float(center), float(width), norm_sq, seg)


class TraceCase(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    GENERIC = "generic"


@dataclass(frozen=True)
class RestrictedTrace:
    """Samples of psi at ``s_j = (j + 1/2) h`` on a segment of length ``length``."""

    values: np.ndarray
    case: TraceCase
    lam: float
    length: float
    window: WindowFunction | None = field(default=None, repr=False)

    @property
    def samples(self):
        return self.values.size

    @property
    def spacing(self):
        return self.length / self.values.size

    @property
    def s(self):
        return (np.arange(self.values.size) + 0.5) * self.spacing

    @property
    def norm_sq(self):
        return float(self.spacing * np.dot(self.values, self.values))


def trace_from_samples(values, length, lam, case=TraceCase.GENERIC, window=None) -> RestrictedTrace:
    values = np.asarray(values, dtype=float)
    need = int(np.ceil(SAMPLES_PER_WAVELENGTH * lam * length / (2 * pi)))
    if values.size < need:
        raise ResolutionError(f"{values.size} samples, need >= {need} at lambda={lam:.4g}")
    return RestrictedTrace(values, TraceCase(case), float(lam), float(length), window)


def _samples_for(u, segment, samples):
    if samples is not None:
        return samples
    need = 2 * min_samples(u, segment)
    return max(DEFAULT_SAMPLES, 1 << int(np.ceil(np.log2(need))))


def even_trace(u: Eigenfunction, segment: CurveSegment, window: WindowFunction, samples=None):
    """psi = f * u restricted to the segment."""
    if u.parity is Parity.ODD:
        raise ParityError("even traces need an even (or unclassified) eigenfunction")
    c = restrict_to_curve(u, segment, _samples_for(u, segment, samples))
    return RestrictedTrace(window(c.s) * c.values, TraceCase.EVEN, u.lam, segment.length, window)


def odd_trace(u: Eigenfunction, segment: CurveSegment, window: WindowFunction, samples=None):
    """psi = f * lam^-1 du/dn restricted to the segment."""
    if u.parity is Parity.EVEN:
        raise ParityError("odd traces need an odd (or unclassified) eigenfunction")
    c = normal_derivative_on_curve(u, segment, _samples_for(u, segment, samples))
    return RestrictedTrace(window(c.s) * c.values, TraceCase.ODD, u.lam, segment.length, window)


# -- differentiation -----------------------------------------------------------------

def _padded_size(n):
    return 1 << int(np.ceil(np.log2(2 * n)))


def spectral_derivative(values, h, m):
    """m-th derivative of compactly supported samples by FFT on a zero-padded
    periodic extension; returns an array of the original length."""
    values = np.asarray(values, dtype=float)
    n = values.size
    size = _padded_size(n)
    spec = np.fft.rfft(values, size)
    w = 2 * pi * np.fft.rfftfreq(size, h)
    d = spec * (1j * w) ** m
    if m % 2 == 1:
        d[-1] = 0.0
    return np.fft.irfft(d, size)[:n]


def fd_derivative(values, h, m):
    """m-th derivative by m applications of the 8th-order central difference
    (zero extension beyond the samples)."""
    out = np.asarray(values, dtype=float)
    for _ in range(m):
        pad = np.concatenate([np.zeros(4), out, np.zeros(4)])
        d = np.zeros_like(out)
        for k, c in enumerate(_FD8, start=1):
            d += c * (pad[4 + k:4 + k + out.size] - pad[4 - k:4 - k + out.size])
        out = d / h
    return out


def derivative_moment(trace: RestrictedTrace, m: int) -> float:
    """lam^(-2m) * integral of |d^m psi / ds^m|^2 over the segment."""
    if m < 0 or m > MAX_ORDER:
        raise OrderError(f"derivative order must lie in [0, {MAX_ORDER}], got {m}")
    if m == 0:
        return trace.norm_sq
    h = trace.spacing
    if trace.lam * h > 2 * pi / SAMPLES_PER_WAVELENGTH * (1 + 1e-12):
        raise ResolutionError("trace is undersampled for its eigenvalue")
    if trace.samples >= SPECTRAL_MIN_SAMPLES:
        n = trace.samples
        size = _padded_size(n)
        spec = np.fft.rfft(trace.values, size)
        w = 2 * pi * np.fft.rfftfreq(size, h) / trace.lam
        power = np.abs(spec) ** 2 * w ** (2 * m)
        if m % 2 == 1:
            power[-1] = 0.0
        # Parseval for the real FFT: interior bins count twice
        total = power[0] + 2 * power[1:-1].sum() + power[-1]
        return float(h * total / size)
    d = fd_derivative(trace.values, h, m) / trace.lam**m
    return float(h * np.dot(d, d))


# -- Rellich-type quantities ----------------------------------------------------------

def rellich_gap(u: Eigenfunction, segment, window: WindowFunction, m: int, samples=None) -> float:
    """||f u||^2 - lam^(-2m) ||d^m (f u)||^2 on the segment."""
    if u.parity is not Parity.EVEN:
        raise ParityError("the Rellich gap is defined for even eigenfunctions")
    if m < 1:
        raise OrderError("the Rellich gap needs m >= 1")
    tr = even_trace(u, segment, window, samples)
    return tr.norm_sq - derivative_moment(tr, m)


def odd_normal_moment(u: Eigenfunction, segment, window: WindowFunction, m: int, samples=None) -> float:
    """lam^(-2m) ||d^m (f lam^-1 du/dn)||^2 on the segment."""
    if u.parity is not Parity.ODD:
        raise ParityError("normal-derivative moments are defined for odd eigenfunctions")
    return derivative_moment(odd_trace(u, segment, window, samples), m)


def l2_mass_check(u: Eigenfunction, segment, window: WindowFunction, samples=None) -> float:
    """integral of f^2 u^2 over the segment divided by 2 * integral of f^2."""
    if u.parity is not Parity.EVEN:
        raise ParityError("the mass check is defined for even eigenfunctions")
    tr = even_trace(u, segment, window, samples)
    return tr.norm_sq / (2 * window.norm_sq)


# -- pairing growth -------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorTerm:
    """coeff(s) * d_t^jt applied to u (jn = 0) or to du/dn (jn = 1) on the curve."""

    jt: int
    jn: int
    coeff: Callable | float = 1.0

    def weight(self, s):
        c = self.coeff(s) if callable(self.coeff) else self.coeff
        return np.broadcast_to(np.asarray(c, dtype=float), np.shape(s))


@dataclass(frozen=True)
class OperatorSpec:
    degree: int
    terms: tuple
    name: str = ""

    def __post_init__(self):
        for t in self.terms:
            if t.jn not in (0, 1) or t.jt < 0 or t.jt + t.jn > self.degree:
                raise OrderError(f"term {t} exceeds degree {self.degree}")


def identity_operator():
    return OperatorSpec(0, (OperatorTerm(0, 0, 1.0),), "identity")


def tangential_second_derivative():
    return OperatorSpec(2, (OperatorTerm(2, 0, 1.0),), "d_t^2")


def window_commutator(window: WindowFunction):
    """f [f, d_t^2] = -f (2 f' d_t + f''), a first-order operator."""
    return OperatorSpec(1, (
        OperatorTerm(1, 0, lambda s: -2 * window(s) * window.derivative(s, 1)),
        OperatorTerm(0, 0, lambda s: -window(s) * window.derivative(s, 2)),
    ), "f[f, d_t^2]")


def _periodic_derivative(values, period, m):
    n = values.size
    spec = np.fft.rfft(values)
    w = 2 * pi * np.fft.rfftfreq(n, period / n)
    d = spec * (1j * w) ** m
    if m % 2 == 1 and n % 2 == 0:
        d[-1] = 0.0
    return np.fft.irfft(d, n)


def boundary_pairing(u: Eigenfunction, op: OperatorSpec, segment: CurveSegment, samples=None) -> float:
    """<L u, u> on the segment, derivatives taken along its closed component."""
    comp = u.surface.component_curve(segment.component)
    need = 2 * int(np.ceil(SAMPLES_PER_WAVELENGTH * u.lam * comp.length / (2 * pi)))
    n = samples or max(DEFAULT_SAMPLES, 1 << int(np.ceil(np.log2(need))))
    h = comp.length / n
    t = (np.arange(n) + 0.5) * h
    a, b = comp.point(t)
    traces = {0: u(a, b)}
    if any(term.jn for term in op.terms):
        na, nb = comp.normal(t)
        ga, gb = u.gradient(a, b)
        traces[1] = na * ga + nb * gb
    s = t - segment.offset
    on = (s >= 0) & (s <= segment.length)
    lu = np.zeros(n)
    for term in op.terms:
        d = _periodic_derivative(traces[term.jn], comp.length, term.jt) if term.jt else traces[term.jn]
        lu += term.weight(np.where(on, s, 0.0)) * d
    return float(h * np.sum((lu * traces[0])[on]))


@dataclass(frozen=True)
class GrowthFit:
    lams: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    degree: int

    @property
    def trivial_bound(self):
        return self.degree + 1

    @property
    def sharp_exponent(self):
        return self.degree + 0.75

    def passed(self, slack=0.1):
        return self.slope <= self.trivial_bound + slack


def fit_exponent(lams, values):
    lams = np.asarray(lams, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if np.any(values <= 0):
        raise FitError("cannot fit a power law through zero values")
    slope, intercept = np.polyfit(np.log(lams), np.log(values), 1)
    return float(slope), float(intercept)


def pairing_growth_diagnostic(modes, op: OperatorSpec, segment: CurveSegment, samples=None) -> GrowthFit:
    """Least-squares slope of log|<L u, u>| against log lam over ``modes``."""
    modes = list(modes)
    lams = np.array([u.lam for u in modes])
    if len(modes) < 5 or np.unique(np.round(lams, 12)).size < 5:
        raise FitError("need at least 5 modes with distinct eigenvalues")
    vals = np.array([boundary_pairing(u, op, segment, samples) for u in modes])
    slope, intercept = fit_exponent(lams, vals)
    return GrowthFit(lams, np.abs(vals), slope, intercept, op.degree)


def predicted_even_gap(m):
    """2 (1 - C(2m, m) / 4^m): limit of gap / integral of f^2."""
    return 2.0 * (1.0 - arcsine_moment(m))


__all__ = [
    "bump_derivative", "bump_square_integral", "WindowFunction", "make_window", "TraceCase",
    "RestrictedTrace", "trace_from_samples", "even_trace", "odd_trace", "spectral_derivative",
    "fd_derivative", "derivative_moment", "rellich_gap", "odd_normal_moment", "l2_mass_check",
    "OperatorTerm", "OperatorSpec", "identity_operator", "tangential_second_derivative",
    "window_commutator", "boundary_pairing", "GrowthFit", "fit_exponent",
    "pairing_growth_diagnostic", "predicted_even_gap", "MAX_ORDER",
]
