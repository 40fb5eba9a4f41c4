"""Standard quantization on the unit flat torus.

``Op(a) u(x) = sum_k a(x, 2 pi k / lam) u_hat(k) exp(2 pi i k.x)`` is a finite
sum for trigonometric polynomials, so no frequency integral is discretized.
Symbols given as sums of products ``g(x) p(xi)`` are applied with FFTs; other
symbols fall back to a loop over the frequencies of ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Callable

import numpy as np

from .errors import AliasingError, FitError, PreconditionError
from .geometry import make_surface
from .restriction import bump_derivative, fit_exponent
from .spectra import EnsembleSpec, Parity, ensemble_eigenfunction, lattice_points


@dataclass(frozen=True)
class FourierSum:
    """Trigonometric polynomial ``sum c_k exp(2 pi i k.x)`` with a nominal lam."""

    coeffs: dict
    lam: float

    @classmethod
    def from_eigenfunction(cls, u):
        return cls(u.fourier_coefficients(), u.lam)

    @property
    def kmax(self):
        return max(max(abs(k1), abs(k2)) for k1, k2 in self.coeffs)

    @property
    def norm(self):
        return sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def frequencies(self):
        return np.array(list(self.coeffs), dtype=float)

    def on_grid(self, resolution):
        return np.fft.ifft2(_coeff_array(self, resolution)) * resolution**2

    def combine(self, other, alpha=1.0, beta=1.0, lam=None):
        out = {k: alpha * v for k, v in self.coeffs.items()}
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + beta * v
        return FourierSum(out, self.lam if lam is None else lam)


def _coeff_array(u: FourierSum, resolution):
    if 2 * u.kmax >= resolution:
        raise AliasingError(f"frequency {u.kmax} does not fit a {resolution}-point grid")
    arr = np.zeros((resolution, resolution), dtype=complex)
    for (k1, k2), c in u.coeffs.items():
        arr[k1 % resolution, k2 % resolution] += c
    return arr


@dataclass(frozen=True)
class TorusSymbol:
    """Symbol a(x, y, xi1, xi2).

    ``terms`` optionally lists ``(g, p)`` pairs with ``a = sum g(x, y) p(xi1, xi2)``;
    ``radial_support`` is an interval of |xi| outside which a vanishes.
    """

    func: Callable = field(repr=False)
    order: float = 0.0
    homogeneous: bool = False
    radial_support: tuple | None = None
    terms: tuple | None = field(default=None, repr=False)
    name: str = ""

    def __call__(self, x, y, xi1, xi2):
        return self.func(x, y, xi1, xi2)

    @classmethod
    def separable(cls, terms, order=0.0, homogeneous=False, radial_support=None, name=""):
        terms = tuple(terms)

        def func(x, y, xi1, xi2):
            return sum(g(x, y) * p(xi1, xi2) for g, p in terms)

        return cls(func, order, homogeneous, radial_support, terms, name)

    def homogenized(self):
        """a(x, xi / |xi|), degree-0 homogeneous."""
        if self.homogeneous:
            return self
        def unit(p):
            def q(xi1, xi2):
                r = np.hypot(xi1, xi2)
                return p(xi1 / r, xi2 / r)
            return q

        if self.terms is not None:
            return TorusSymbol.separable([(g, unit(p)) for g, p in self.terms], 0.0, True,
                                         name=f"{self.name}~")

        def func(x, y, xi1, xi2):
            r = np.hypot(xi1, xi2)
            return self.func(x, y, xi1 / r, xi2 / r)

        return TorusSymbol(func, 0.0, True, name=f"{self.name}~")

    def homogeneity_error(self, samples=64, seed=0):
        rng = np.random.default_rng(seed)
        x, y = rng.random((2, samples))
        xi1, xi2 = rng.normal(size=(2, samples))
        base = self(x, y, xi1, xi2)
        return float(max(np.abs(self(x, y, t * xi1, t * xi2) - base).max() for t in (2.0, 5.0)))


def multiplier_symbol(p, order=0.0, name=""):
    return TorusSymbol.separable([(lambda x, y: np.ones_like(np.asarray(x, dtype=float)), p)], order, name=name)


def potential_symbol(v, name=""):
    return TorusSymbol.separable([(v, lambda xi1, xi2: np.ones_like(np.asarray(xi1, dtype=float)))],
                                 0.0, True, name=name)


def radial_bump_symbol(r_minus, r_plus):
    c, w = 0.5 * (r_minus + r_plus), r_plus - r_minus

    def p(xi1, xi2):
        return bump_derivative(2 * (np.hypot(xi1, xi2) - c) / w)

    sym = multiplier_symbol(p, name=f"bump[{r_minus:g},{r_plus:g}]")
    return TorusSymbol(sym.func, 0.0, False, (r_minus, r_plus), sym.terms, sym.name)


def _default_resolution(u: FourierSum, extra=16):
    need = 2 * (u.kmax + extra) + 1
    return max(64, 1 << int(np.ceil(np.log2(need))))


def quantize_apply(a: TorusSymbol, u: FourierSum, lam=None, resolution=None):
    """Op(a) u on the ``resolution x resolution`` grid (complex values)."""
    lam = u.lam if lam is None else lam
    n = resolution or _default_resolution(u)
    x = np.arange(n) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    if a.terms is not None:
        arr = _coeff_array(u, n)
        k = np.fft.fftfreq(n, 1.0 / n)
        K1, K2 = np.meshgrid(k, k, indexing="ij")
        xi1, xi2 = 2 * pi * K1 / lam, 2 * pi * K2 / lam
        out = np.zeros((n, n), dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            for g, p in a.terms:
                mult = np.where(arr != 0, p(xi1, xi2), 0.0)
                out += g(X, Y) * np.fft.ifft2(arr * mult) * n * n
        return out
    if 2 * u.kmax >= n:
        raise AliasingError(f"frequency {u.kmax} does not fit a {n}-point grid")
    out = np.zeros((n, n), dtype=complex)
    for (k1, k2), c in u.coeffs.items():
        sym = a(X, Y, 2 * pi * k1 / lam, 2 * pi * k2 / lam)
        out += sym * c * np.exp(2j * pi * (k1 * X + k2 * Y))
    return out


def pairing(a: TorusSymbol, u: FourierSum, lam=None, resolution=None):
    """<Op(a) u, u> by grid quadrature (exact for trigonometric integrands)."""
    n = resolution or _default_resolution(u)
    ou = quantize_apply(a, u, lam, n)
    return complex(np.sum(ou * np.conj(u.on_grid(n))) / n**2)


def liouville_average(a: TorusSymbol, surface=None, x_points=64, angles=256):
    """Normalized integral of a over the unit cosphere bundle of the torus."""
    surface = surface or make_surface("torus")
    x = (np.arange(x_points) + 0.5) / x_points
    th = 2 * pi * np.arange(angles) / angles
    X, Y, TH = np.meshgrid(x, x, th, indexing="ij")
    vals = a(X, Y, np.cos(TH), np.sin(TH))
    cell = (surface.sides[0] / x_points) * (surface.sides[1] / x_points) * (2 * pi / angles)
    return float(np.real(np.sum(vals)) * cell / surface.liouville_normalizer)


@dataclass(frozen=True)
class MatrixElementReport:
    lam: float
    value: complex
    liouville: float
    directions: int = 0

    @property
    def deviation(self):
        return abs(self.value - self.liouville)

    def row(self):
        return [f"{self.lam:.12g}", f"{self.value.real:.12g}", f"{self.liouville:.12g}", f"{self.deviation:.6g}"]


def matrix_element(a: TorusSymbol, u, resolution=None) -> MatrixElementReport:
    fs = u if isinstance(u, FourierSum) else FourierSum.from_eigenfunction(u)
    value = pairing(a, fs, resolution=resolution) / fs.norm**2
    d = getattr(u, "directions", 0)
    return MatrixElementReport(fs.lam, value, liouville_average(a), d)


# -- cutoff and reduction checks --------------------------------------------------------

@dataclass(frozen=True)
class CutoffReport:
    exact_norm: float
    quasimode_norm: float
    eps: float


def _l2(values):
    return float(np.sqrt(np.mean(np.abs(values) ** 2)))


def cutoff_decay_check(a: TorusSymbol, u, delta: float, eps=0.01, potential=None) -> CutoffReport:
    """||Op(a) u|| / ||u|| for the eigenfunction and for (1 + eps V) u."""
    if a.radial_support is None:
        raise PreconditionError("symbol carries no radial support")
    lo, hi = a.radial_support
    if hi >= 1 - delta and lo <= 1 + delta:
        raise PreconditionError(f"radial support [{lo:g}, {hi:g}] meets [1-{delta:g}, 1+{delta:g}]")
    fs = FourierSum.from_eigenfunction(u)
    potential = potential or {(1, 0): 0.5, (-1, 0): 0.5, (0, 1): 0.5, (0, -1): 0.5}
    n = _default_resolution(fs, extra=max(max(abs(k1), abs(k2)) for k1, k2 in potential) + 1)
    exact = _l2(quantize_apply(a, fs, resolution=n)) / _l2(fs.on_grid(n))
    shifted = dict(fs.coeffs)
    for (k1, k2), c in fs.coeffs.items():
        for (v1, v2), vc in potential.items():
            key = (k1 + v1, k2 + v2)
            shifted[key] = shifted.get(key, 0.0) + eps * vc * c
    qm = FourierSum(shifted, fs.lam)
    quasi = _l2(quantize_apply(a, qm, resolution=n)) / _l2(qm.on_grid(n))
    return CutoffReport(exact, quasi, eps)


def nearest_sum_of_two_squares(target, parity=Parity.EVEN):
    """Sum of two squares closest to ``target`` (ties to the larger) whose
    eigenspace has modes of the requested parity."""
    base = int(round(target))
    for off in range(0, 10 * base + 10):
        for cand in (base + off, base - off):
            if cand > 0 and lattice_points(cand):
                if parity is not Parity.ODD or any(l for _, l in lattice_points(cand)):
                    return cand
    raise FitError(f"no sum of two squares near {target}")


def quasimode(n, seed=0, parity=Parity.EVEN) -> FourierSum:
    """Two eigenfunction clusters at n and n' ~ n (1 + 1/lam)^2, equally weighted;
    the nominal lam is that of the first cluster."""
    lam = 2 * pi * sqrt(n)
    n2 = nearest_sum_of_two_squares(n * (1 + 1 / lam) ** 2, parity)
    if n2 == n:
        n2 = nearest_sum_of_two_squares(n + 1, parity)
    u1 = FourierSum.from_eigenfunction(ensemble_eigenfunction(EnsembleSpec("torus", n, parity, seed)))
    u2 = FourierSum.from_eigenfunction(ensemble_eigenfunction(EnsembleSpec("torus", n2, parity, seed)))
    return u1.combine(u2, 1 / sqrt(2), 1 / sqrt(2), lam)


@dataclass(frozen=True)
class ReductionReport:
    lams: np.ndarray
    d: np.ndarray
    exponent: float | None

    def row(self, i):
        return [f"{self.lams[i]:.12g}", f"{self.d[i]:.6g}",
                "" if self.exponent is None else f"{self.exponent:.6g}"]


def reduction_difference(a: TorusSymbol, u) -> float:
    fs = u if isinstance(u, FourierSum) else FourierSum.from_eigenfunction(u)
    at = a.homogenized()
    return abs(pairing(a, fs) - pairing(at, fs)) / fs.norm**2


def homogeneous_reduction_check(a: TorusSymbol, sequence, fit=True) -> ReductionReport:
    """d(lam) = |<Op(a) u, u> - <Op(a~) u, u>| along a sequence, with the fitted
    power-law exponent of d when ``fit`` is set."""
    seq = list(sequence)
    if len(seq) < 4:
        raise FitError("need at least 4 sequence members")
    lams = np.array([getattr(u, "lam") for u in seq])
    d = np.array([reduction_difference(a, u) for u in seq])
    exponent = fit_exponent(lams, d)[0] if fit else None
    return ReductionReport(lams, d, exponent)


def xi1_squared():
    return multiplier_symbol(lambda xi1, xi2: xi1**2, 2.0, name="xi1^2")


def modulated_kinetic_symbol():
    """|xi|^2 (1 + cos(2 pi x) / 2), a second-order symbol."""
    return TorusSymbol.separable([
        (lambda x, y: 1.0 + 0.5 * np.cos(2 * pi * x), lambda xi1, xi2: xi1**2 + xi2**2),
    ], 2.0, name="|xi|^2 g(x)")


__all__ = [
    "FourierSum", "TorusSymbol", "multiplier_symbol", "potential_symbol", "radial_bump_symbol",
    "quantize_apply", "pairing", "liouville_average", "MatrixElementReport", "matrix_element",
    "CutoffReport", "cutoff_decay_check", "nearest_sum_of_two_squares", "quasimode",
    "ReductionReport", "reduction_difference", "homogeneous_reduction_check", "xi1_squared",
    "modulated_kinetic_symbol",
]
