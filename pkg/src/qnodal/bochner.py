"""Spectral moments of a trace and the positive-definiteness test that
certifies its sign changes.

A nonnegative trace has a nonnegative autocorrelation, and its normalized
autocorrelation is the characteristic function of the trace's spectral
profile.  A characteristic function that dips below zero therefore certifies
that the trace changes sign.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from math import pi, sqrt

import numpy as np
from scipy.linalg import eigvalsh, toeplitz

from .errors import DegenerateTraceError, GridError, OrderError, PreconditionError
from .nodal import count_sign_changes_on_segment
from .restriction import RestrictedTrace, TraceCase, make_window
from .specfun import LawKind, ReferenceLaw, bessel_j, semicircle_char

DEFAULT_TOL = 1e-3
DEFAULT_T_MAX = 4 * pi
DEFAULT_T_POINTS = 257
MAX_MOMENT_ORDER = 12


@dataclass(frozen=True)
class SpectralProfile:
    """Density samples ``h`` at nodes ``xi`` with quadrature ``weights``."""

    xi: np.ndarray
    h: np.ndarray
    weights: np.ndarray

    @property
    def mass(self):
        return float(np.dot(self.weights, self.h))

    @classmethod
    def from_density(cls, density, n=2000):
        """Profile of a density on [-1, 1] sampled on the mapped grid
        xi = sin(theta); the Jacobian absorbs inverse square-root endpoints."""
        theta = -0.5 * pi + (np.arange(n) + 0.5) * pi / n
        xi = np.sin(theta)
        w = np.cos(theta) * pi / n
        return cls(xi, np.asarray(density(xi), dtype=float), w)

    @classmethod
    def uniform(cls, xi, h):
        xi = np.asarray(xi, dtype=float)
        dx = xi[1] - xi[0]
        w = np.full(xi.size, dx)
        w[0] *= 0.5
        w[-1] *= 0.5
        return cls(xi, np.asarray(h, dtype=float), w)


def _spectrum(trace: RestrictedTrace, size):
    """|psi_hat(omega_k)|^2 with psi_hat(w) = (2 pi)^-1/2 int psi(s) e^{i w s} ds."""
    h = trace.spacing
    c = np.fft.fft(trace.values, size) * h
    omega = 2 * pi * np.fft.fftfreq(size, h)
    return omega, np.abs(c) ** 2 / (2 * pi)


def _check_trace(trace):
    if not np.any(trace.values):
        raise DegenerateTraceError("trace vanishes identically")


def fourier_profile(trace: RestrictedTrace, xi_max=3.0, oversample=8) -> SpectralProfile:
    """h(xi) = lam |psi_hat(lam xi)|^2 / ||psi||^2 on [-xi_max, xi_max]
    (the whole resolved band when ``xi_max`` is None)."""
    _check_trace(trace)
    size = 1 << int(np.ceil(np.log2(oversample * trace.samples)))
    omega, power = _spectrum(trace, size)
    order = np.argsort(omega)
    xi = omega[order] / trace.lam
    h = trace.lam * power[order] / trace.norm_sq
    keep = np.abs(xi) <= (np.inf if xi_max is None else xi_max)
    dxi = 2 * pi / (size * trace.spacing * trace.lam)
    # the frequency sum is an exact Plancherel rule, so the weights are uniform
    return SpectralProfile(xi[keep], h[keep], np.full(int(keep.sum()), dxi))


@dataclass(frozen=True)
class MomentSequence:
    """Even moments ``values[k] = mu_{2k}``; odd moments vanish by symmetry."""

    values: np.ndarray
    normalized: bool = True

    @property
    def mmax(self):
        return self.values.size - 1

    def full(self):
        """mu_0, mu_1, ..., mu_{2 mmax} with the odd entries set to 0."""
        out = np.zeros(2 * self.mmax + 1)
        out[::2] = self.values
        return out

    def hankel_min_eigs(self):
        mu = self.full()
        return np.array([eigvalsh(np.array([[mu[i + j] for j in range(r + 1)] for i in range(r + 1)])).min()
                         for r in range(self.mmax + 1)])


def moments_of_profile(profile: SpectralProfile, mmax=6, normalize=True) -> MomentSequence:
    if mmax > MAX_MOMENT_ORDER or mmax < 0:
        raise OrderError(f"moment depth must lie in [0, {MAX_MOMENT_ORDER}]")
    sym = 0.5 * (profile.h + np.interp(-profile.xi, profile.xi, profile.h))
    x2 = profile.xi**2
    vals = np.array([np.dot(profile.weights, x2**k * sym) for k in range(mmax + 1)])
    if normalize:
        vals = vals / vals[0]
    return MomentSequence(vals, normalize)


@dataclass(frozen=True)
class CarlemanReport:
    r: np.ndarray  # r[k-1] = mu_{2k}^(1/2k) / (2k)
    max: float
    argmax: int


def carleman_report(mu: MomentSequence) -> CarlemanReport:
    if abs(mu.values[0] - 1.0) > 1e-8:
        raise PreconditionError("Carleman report needs mu_0 = 1")
    k = np.arange(1, mu.mmax + 1)
    r = np.maximum(mu.values[1:], 0.0) ** (1.0 / (2 * k)) / (2 * k)
    i = int(np.argmax(r)) if r.size else 0
    return CarlemanReport(r, float(r[i]) if r.size else 0.0, i + 1)


def default_t_grid(t_max=DEFAULT_T_MAX, points=DEFAULT_T_POINTS):
    return np.linspace(0.0, t_max, points)


def char_function(trace: RestrictedTrace, t_grid=None):
    """phi(t) = int psi(s) psi(s + t/lam) ds / ||psi||^2, computed from the
    power spectrum of the zero-padded trace (exact for the trigonometric
    interpolant; the padding exceeds the largest lag)."""
    _check_trace(trace)
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    h = trace.spacing
    lag = np.abs(t).max() / trace.lam if t.size else 0.0
    size = 1 << int(np.ceil(np.log2(2 * trace.samples + lag / h + 1)))
    omega, power = _spectrum(trace, size)
    p = power / power.sum()
    return np.cos(np.outer(t / trace.lam, omega)) @ p


@dataclass(frozen=True)
class PsdVerdict:
    negative: bool
    t_star: float
    value: float
    pointwise_min: float
    toeplitz_min_eig: float

    @property
    def label(self):
        return "NegativeAt" if self.negative else "PSD"


def _check_uniform(t):
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        raise GridError("need at least two grid points")
    d = np.diff(t)
    if np.abs(d - d[0]).max() > 1e-9 * max(abs(d[0]), 1e-300) or d[0] <= 0:
        raise GridError("t-grid must be uniform and increasing")
    if abs(t[0]) > 1e-12:
        raise GridError("t-grid must start at 0")
    return t


def psd_test(phi, t_grid=None, tol=DEFAULT_TOL) -> PsdVerdict:
    """Pointwise minimum of phi and the smallest eigenvalue of the Toeplitz
    matrix [phi(t_i - t_j)] (phi is even, so one column determines it)."""
    phi = np.asarray(phi, dtype=float)
    t = _check_uniform(default_t_grid(points=phi.size) if t_grid is None else t_grid)
    if t.size != phi.size:
        raise GridError("phi and t-grid differ in length")
    i = int(np.argmin(phi))
    lam_min = float(eigvalsh(toeplitz(phi)).min())
    neg = phi[i] < -tol or lam_min < -tol
    return PsdVerdict(bool(neg), float(t[i]), float(phi[i]), float(phi[i]), lam_min)


def reference_char(law: ReferenceLaw, t):
    """Characteristic function of a reference law."""
    t = np.asarray(t, dtype=float)
    if law.kind is LawKind.SEMICIRCLE:
        return semicircle_char(t)
    a = law.mixture_weight
    out = (1.0 - a) * np.cos(t) + a * bessel_j(0, t)
    return float(out) if np.ndim(out) == 0 else out


def fitted_mixture_weight(mu: MomentSequence):
    """a with (1 - a) + a / 2 = mu_2, clipped to [0, 1]."""
    return float(np.clip(2.0 * (1.0 - mu.values[1]), 0.0, 1.0))


@dataclass
class DetectorResult:
    verdict: str
    phi_min: float
    t_star: float
    toeplitz_min_eig: float
    fitted_a: float
    moments: list = field(default_factory=list)
    carleman: list = field(default_factory=list)
    scan_changes: int = 0

    @property
    def sign_change(self):
        return self.verdict == "SignChange"

    @property
    def scan_agrees(self):
        """A certificate must be backed by a sign change seen in the samples; a
        trace without sign changes must not be certified."""
        if self.sign_change:
            return self.scan_changes > 0
        return True

    def to_json(self):
        d = asdict(self)
        d.pop("scan_changes")
        return json.dumps(d, sort_keys=True)


def direct_scan(trace: RestrictedTrace, zero_band=1e-9):
    return count_sign_changes_on_segment(trace.values, zero_band=zero_band, closed=False)


def detect_sign_change(trace: RestrictedTrace, t_grid=None, tol=DEFAULT_TOL, mmax=6) -> DetectorResult:
    t = default_t_grid() if t_grid is None else t_grid
    phi = char_function(trace, t)
    v = psd_test(phi, t, tol)
    mu = moments_of_profile(fourier_profile(trace), mmax)
    car = carleman_report(mu)
    return DetectorResult("SignChange" if v.negative else "NoEvidence", v.pointwise_min, v.t_star,
                          v.toeplitz_min_eig, fitted_mixture_weight(mu), mu.values.tolist(),
                          car.r.tolist(), direct_scan(trace))


# -- synthetic traces -----------------------------------------------------------------

def bump_mixture_trace(rng, length=1.0, lam=50.0, samples=2048, bumps=4):
    """Random nonnegative trace: a positive combination of bumps."""
    s = (np.arange(samples) + 0.5) * length / samples
    out = np.zeros(samples)
    for _ in range(bumps):
        w = rng.uniform(0.05, 0.4) * length
        c = rng.uniform(0.5 * w, length - 0.5 * w)
        win = make_window(length, c, w)
        out += rng.uniform(0.1, 1.0) * win(s)
    return RestrictedTrace(out, TraceCase.GENERIC, float(lam), float(length))


def mixture_trace(a, lam, terms, seed, length=1.0, center=0.5, width=0.8, samples=None):
    """Windowed trace whose spectral profile approximates Mixture(a): mass
    1 - a at xi = +-1 and mass a spread over Chebyshev nodes (arcsine law).

    Only the positive half of a 2*terms-point Chebyshev rule is used, so every
    frequency carries a single term and random phases cannot interfere.
    """
    rng = np.random.default_rng(seed)
    n = samples or max(4096, 1 << int(np.ceil(np.log2(40 * lam * length / (2 * pi)))))
    s = (np.arange(n) + 0.5) * length / n
    j = np.arange(1, terms + 1)
    xi = np.cos((2 * j - 1) * pi / (4 * terms))
    g = sqrt(2 * (1 - a)) * np.cos(lam * s + rng.uniform(0, 2 * pi))
    amp = sqrt(2 * a / terms)
    for x, ph in zip(xi, rng.uniform(0, 2 * pi, terms)):
        g = g + amp * np.cos(lam * x * s + ph)
    f = make_window(length, center, width)
    return RestrictedTrace(f(s) * g, TraceCase.GENERIC, float(lam), float(length), f)


__all__ = [
    "SpectralProfile", "fourier_profile", "MomentSequence", "moments_of_profile",
    "CarlemanReport", "carleman_report", "char_function", "default_t_grid", "PsdVerdict",
    "psd_test", "reference_char", "fitted_mixture_weight", "DetectorResult", "direct_scan",
    "detect_sign_change", "bump_mixture_trace", "mixture_trace",
]
