"""Exact Laplacian eigenfunctions on the model surfaces.

Explicit modes are products of a factor in each intrinsic coordinate, so every
eigenfunction here is a finite sum ``sum_i c_i A_i(a) B_i(b)``.  Grid
evaluation uses that structure directly (one outer product per mode).

Torus ensembles combine every lattice mode of a fixed norm ``k^2 + l^2 = n``
with random coefficients; they average the lattice directions and stand in for
equidistributing eigenfunction sequences.
"""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from math import isqrt, pi, sqrt

import numpy as np

from .errors import ConfigurationError, EmptyEigenspaceError, ModeError, ResolutionError
from .geometry import CurveSegment, SurfaceModel, make_surface

# below this many lattice directions an ensemble is reported as non-equidistributing
MIN_DIRECTIONS = 8
SAMPLES_PER_WAVELENGTH = 16


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    NONE = "none"


class CoefficientLaw(enum.Enum):
    EQUAL_SIGN = "equal_sign"
    GAUSSIAN = "gaussian"


def _trig(kind, w, x):
    return np.cos(w * x) if kind == "cos" else np.sin(w * x)


def _dtrig(kind, w, x):
    return -w * np.sin(w * x) if kind == "cos" else w * np.cos(w * x)


@dataclass(frozen=True)
class TorusMode:
    """L2-normalized ``X(2 pi k x / a) Y(2 pi l y / b)`` with X, Y in {cos, sin}."""

    k: int
    l: int
    kind_x: str = "cos"
    kind_y: str = "cos"

    def __post_init__(self):
        if self.k < 0 or self.l < 0 or (self.k == 0 and self.l == 0):
            raise ModeError(f"torus mode needs k, l >= 0 not both zero, got ({self.k}, {self.l})")
        for kind, w in ((self.kind_x, self.k), (self.kind_y, self.l)):
            if kind not in ("cos", "sin"):
                raise ModeError(f"trig kind must be 'cos' or 'sin', got {kind!r}")
            if kind == "sin" and w == 0:
                raise ModeError("sin factor with zero wave number vanishes identically")

    @property
    def parity(self):
        return Parity.EVEN if self.kind_y == "cos" else Parity.ODD

    def scale(self, sides):
        # 1/sqrt(area) times sqrt(2) per oscillating factor
        s = 1.0 / sqrt(sides[0] * sides[1])
        return s * (sqrt(2) if self.k else 1.0) * (sqrt(2) if self.l else 1.0)

    def wave(self, sides):
        return 2 * pi * self.k / sides[0], 2 * pi * self.l / sides[1]

    def eigenvalue_sq(self, sides):
        wx, wy = self.wave(sides)
        return wx * wx + wy * wy

    def factors(self, a, b, sides, da=0, db=0):
        """Factor arrays (A(a), B(b)) including the normalization, or their
        first derivatives when ``da``/``db`` is 1."""
        wx, wy = self.wave(sides)
        fa = _dtrig(self.kind_x, wx, a) if da else _trig(self.kind_x, wx, a)
        fb = _dtrig(self.kind_y, wy, b) if db else _trig(self.kind_y, wy, b)
        return self.scale(sides) * fa, fb

    def label(self):
        return f"{self.k} {self.l} {self.kind_x} {self.kind_y}"


def legendre_normalized(lmax, m, theta):
    """Normalized associated Legendre values Q_l^m(theta) for l = m..lmax.

    ``Q_l^m(theta)`` times ``1`` (m = 0) or ``sqrt(2) cos/sin(m phi)`` is an
    L2-normalized real spherical harmonic.  Works for complex ``theta`` (used
    for complex-step derivatives).  Returns an array of shape
    ``(lmax - m + 1,) + theta.shape``.
    """
    theta = np.asarray(theta)
    x = np.cos(theta)
    s = np.sin(theta)
    q = np.full(theta.shape, 1.0 / sqrt(4 * pi), dtype=np.result_type(theta, float))
    for j in range(1, m + 1):
        q = q * sqrt((2 * j + 1) / (2 * j)) * s
    out = [q]
    if lmax == m:
        return np.stack(out)
    prev, cur = q, sqrt(2 * m + 3) * x * q
    out.append(cur)
    a_prev = sqrt(2 * m + 3)
    for l in range(m + 2, lmax + 1):
        a_l = sqrt((4 * l * l - 1) / (l * l - m * m))
        prev, cur = cur, a_l * (x * cur - prev / a_prev)
        a_prev = a_l
        out.append(cur)
    return np.stack(out)


@dataclass(frozen=True)
class SphereMode:
    """Real spherical harmonic ``Q_l^m(theta) * trig(m phi)``, unit L2 norm."""

    l: int
    m: int
    kind: str = "cos"

    def __post_init__(self):
        if self.l < 1:
            raise ModeError(f"sphere degree must be >= 1 (positive eigenvalue), got {self.l}")
        if not 0 <= self.m <= self.l:
            raise ModeError(f"need 0 <= m <= l, got l={self.l}, m={self.m}")
        if self.kind not in ("cos", "sin"):
            raise ModeError(f"longitude factor must be 'cos' or 'sin', got {self.kind!r}")
        if self.kind == "sin" and self.m == 0:
            raise ModeError("sin-type harmonic with m = 0 vanishes identically")

    @property
    def parity(self):
        return Parity.EVEN if self.kind == "cos" else Parity.ODD

    def eigenvalue_sq(self, sides=None):
        return float(self.l * (self.l + 1))

    def theta_factor(self, theta, d=0):
        theta = np.asarray(theta, dtype=float)
        if d == 0:
            return legendre_normalized(self.l, self.m, theta)[-1]
        h = 1e-20
        return legendre_normalized(self.l, self.m, theta + 1j * h)[-1].imag / h

    def factors(self, a, b, sides=None, da=0, db=0):
        c = sqrt(2) if self.m else 1.0
        fa = self.theta_factor(a, da)
        fb = _dtrig(self.kind, self.m, b) if db else _trig(self.kind, self.m, b)
        return c * fa, fb

    def label(self):
        return f"{self.l} {self.m} {self.kind}"


@dataclass(frozen=True)
class EnsembleSpec:
    """Selector for a random eigenfunction in one eigenspace.

    ``selector`` is ``n`` with ``lambda^2 = 4 pi^2 n`` on the unit torus or the
    degree ``l`` on the sphere.
    """

    surface: str = "torus"
    selector: int = 325
    parity: Parity = Parity.EVEN
    seed: int = 0
    law: CoefficientLaw = CoefficientLaw.EQUAL_SIGN

    def __post_init__(self):
        if self.surface not in ("torus", "sphere"):
            raise ConfigurationError(f"unsupported surface {self.surface!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if not isinstance(self.parity, Parity):
            object.__setattr__(self, "parity", Parity(self.parity))
        if not isinstance(self.law, CoefficientLaw):
            object.__setattr__(self, "law", CoefficientLaw(self.law))

    def key(self):
        text = f"{self.surface}|{self.selector}|{self.parity.value}|{self.law.value}|{self.seed}"
        return int.from_bytes(hashlib.sha256(text.encode()).digest()[:16], "little")


@dataclass(frozen=True)
class Eigenfunction:
    """``u = sum_i coeffs[i] * modes[i]`` with ``-Lap u = lam^2 u``."""

    surface: SurfaceModel
    lam: float
    parity: Parity
    modes: tuple
    coeffs: np.ndarray = field(repr=False)
    directions: int = 0
    spec: EnsembleSpec | None = None
    flags: tuple = ()

    @property
    def l2_norm(self):
        return float(np.sqrt(np.sum(self.coeffs**2)))

    @property
    def is_ensemble(self):
        return self.spec is not None

    def _sum(self, a, b, da=0, db=0):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        out = np.zeros(np.broadcast(a, b).shape)
        for c, mode in zip(self.coeffs, self.modes):
            fa, fb = mode.factors(a, b, self.surface.sides, da, db)
            out += c * fa * fb
        return out

    def __call__(self, a, b):
        return self._sum(a, b)

    def gradient(self, a, b):
        """Coordinate partials (du/da, du/db)."""
        return self._sum(a, b, da=1), self._sum(a, b, db=1)

    def on_grid(self, resolution):
        """Values on the node-centred sample grid of the surface."""
        a_ax, b_ax = self.surface.grid_axes(resolution)
        out = np.zeros((a_ax.size, b_ax.size))
        for c, mode in zip(self.coeffs, self.modes):
            fa, fb = mode.factors(a_ax, b_ax, self.surface.sides)
            out += np.outer(c * fa, fb)
        return out

    def fourier_coefficients(self):
        """Complex exponential coefficients ``{(k1, k2): c}`` of a torus
        eigenfunction on the unit-period lattice."""
        if not self.surface.is_torus:
            raise ModeError("Fourier coefficients exist only on the torus")
        out = {}
        for c, mode in zip(self.coeffs, self.modes):
            s = c * mode.scale(self.surface.sides)
            px = _exp_parts(mode.kind_x, mode.k)
            py = _exp_parts(mode.kind_y, mode.l)
            for k1, cx in px:
                for k2, cy in py:
                    out[(k1, k2)] = out.get((k1, k2), 0.0) + s * cx * cy
        return {k: v for k, v in out.items() if v != 0}


def _exp_parts(kind, k):
    if k == 0:
        return [(0, 1.0)]
    if kind == "cos":
        return [(k, 0.5), (-k, 0.5)]
    return [(k, -0.5j), (-k, 0.5j)]


def _as_mode(surface, mode):
    if isinstance(mode, (TorusMode, SphereMode)):
        good = isinstance(mode, TorusMode) == surface.is_torus
        if not good:
            raise ModeError("mode type does not match the surface")
        return mode
    if isinstance(mode, dict):
        mode = tuple(mode.values())
    return TorusMode(*mode) if surface.is_torus else SphereMode(*mode)


def classify_parity(u, resolution=32, tol=1e-10):
    """Parity of ``u`` under the involution, tested on the sample grid."""
    a, b = u.surface.sample_grid(resolution)
    v = u(a, b)
    w = u(*u.surface.involution(a, b))
    scale = max(np.abs(v).max(), 1e-300)
    if np.abs(w - v).max() < tol * scale:
        return Parity.EVEN
    if np.abs(w + v).max() < tol * scale:
        return Parity.ODD
    return Parity.NONE


def explicit_eigenfunction(surface: SurfaceModel, mode) -> Eigenfunction:
    """Single normalized basis mode.

    Torus modes are ``TorusMode(k, l, kind_x, kind_y)`` (or a tuple of those
    fields); sphere modes are ``SphereMode(l, m, kind)``.
    """
    mode = _as_mode(surface, mode)
    lam = sqrt(mode.eigenvalue_sq(surface.sides))
    u = Eigenfunction(surface, lam, mode.parity, (mode,), np.ones(1), directions=_mode_directions(surface, [mode]))
    found = classify_parity(u)
    if found is not mode.parity:
        raise ModeError(f"parity check failed for {mode}: expected {mode.parity}, found {found}")
    return u


def lattice_points(n):
    """All (k, l) with k, l >= 0 and k^2 + l^2 = n."""
    out = []
    for k in range(isqrt(n) + 1):
        r = n - k * k
        l = isqrt(r)
        if l * l == r:
            out.append((k, l))
    return out


def _mode_directions(surface, modes):
    if not surface.is_torus:
        return len(modes)
    vecs = set()
    for mode in modes:
        for sk in (1, -1):
            for sl in (1, -1):
                vecs.add((sk * mode.k, sl * mode.l))
    return len(vecs)


def lattice_directions(n):
    """Angles of every lattice vector with squared norm ``n``, sorted."""
    pts = lattice_points(n)
    vecs = {(sk * k, sl * l) for k, l in pts for sk in (1, -1) for sl in (1, -1)}
    return np.sort([np.arctan2(l, k) for k, l in vecs])


def eigenspace_basis(surface_name, selector, parity):
    """Orthonormal real basis of one eigenspace restricted to a parity class."""
    want_even = parity in (Parity.EVEN, Parity.NONE)
    want_odd = parity in (Parity.ODD, Parity.NONE)
    modes = []
    if surface_name == "torus":
        for k, l in lattice_points(int(selector)):
            kinds_x = ("cos", "sin") if k else ("cos",)
            kinds_y = []
            if want_even:
                kinds_y.append("cos")
            if want_odd and l:
                kinds_y.append("sin")
            modes += [TorusMode(k, l, kx, ky) for ky in kinds_y for kx in kinds_x]
    else:
        l = int(selector)
        if l < 1:
            return []
        if want_even:
            modes += [SphereMode(l, m, "cos") for m in range(l + 1)]
        if want_odd:
            modes += [SphereMode(l, m, "sin") for m in range(1, l + 1)]
    return modes


def draw_coefficients(spec: EnsembleSpec, count):
    rng = np.random.Generator(np.random.Philox(key=spec.key()))
    if spec.law is CoefficientLaw.EQUAL_SIGN:
        c = np.where(rng.random(count) < 0.5, -1.0, 1.0)
    else:
        c = rng.standard_normal(count)
    return c / np.sqrt(np.sum(c**2))


def ensemble_eigenfunction(spec: EnsembleSpec) -> Eigenfunction:
    """Random unit-norm combination of all basis modes of one eigenspace."""
    surface = make_surface(spec.surface)
    modes = eigenspace_basis(spec.surface, spec.selector, spec.parity)
    if not modes:
        raise EmptyEigenspaceError(
            f"no {spec.parity.value} modes for selector {spec.selector} on the {spec.surface}")
    coeffs = draw_coefficients(spec, len(modes))
    lam = sqrt(modes[0].eigenvalue_sq(surface.sides))
    d = _mode_directions(surface, modes)
    flags = ("non-equidistributing",) if surface.is_torus and d < MIN_DIRECTIONS else ()
    return Eigenfunction(surface, lam, spec.parity, tuple(modes), coeffs, d, spec, flags)


# -- manifests --------------------------------------------------------------------

def write_manifest(u: Eigenfunction, path):
    """Text manifest that replays ``u`` exactly (coefficients as repr floats)."""
    spec = u.spec
    lines = ["# ensemble manifest", f"surface = {u.surface.kind.value}"]
    if spec is not None:
        lines += [f"selector = {spec.selector}", f"parity = {spec.parity.value}",
                  f"seed = {spec.seed}", f"law = {spec.law.value}"]
    else:
        lines.append(f"parity = {u.parity.value}")
    lines += [f"mode = {m.label()} {float(c)!r}" for m, c in zip(u.modes, u.coeffs)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_manifest(path) -> Eigenfunction:
    header, rows = {}, []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = (p.strip() for p in line.partition("="))
            if key == "mode":
                rows.append(value.split())
            else:
                header[key] = value
    surface = make_surface(header["surface"])
    modes, coeffs = [], []
    for r in rows:
        if surface.is_torus:
            modes.append(TorusMode(int(r[0]), int(r[1]), r[2], r[3]))
        else:
            modes.append(SphereMode(int(r[0]), int(r[1]), r[2]))
        coeffs.append(float(r[-1]))
    if not modes:
        raise EmptyEigenspaceError("manifest lists no modes")
    spec = None
    if "selector" in header:
        spec = EnsembleSpec(header["surface"], int(header["selector"]), Parity(header["parity"]),
                            int(header["seed"]), CoefficientLaw(header["law"]))
    lam = sqrt(modes[0].eigenvalue_sq(surface.sides))
    d = _mode_directions(surface, modes)
    flags = ("non-equidistributing",) if spec and surface.is_torus and d < MIN_DIRECTIONS else ()
    return Eigenfunction(surface, lam, Parity(header["parity"]), tuple(modes), np.array(coeffs), d, spec, flags)


# -- restriction to curves -----------------------------------------------------------

@dataclass(frozen=True)
class CurveSamples:
    """Arc-length samples at cell midpoints ``s_j = (j + 1/2) L / N``."""

    s: np.ndarray
    values: np.ndarray
    length: float
    lam: float
    closed: bool = False

    @property
    def spacing(self):
        return self.length / self.s.size


def min_samples(u, segment):
    return int(np.ceil(SAMPLES_PER_WAVELENGTH * u.lam * segment.length / (2 * pi)))


def _curve_nodes(u, segment, samples):
    need = min_samples(u, segment)
    if samples < need:
        raise ResolutionError(f"{samples} samples on a curve of length {segment.length:g} "
                              f"at lambda={u.lam:.4g}; need >= {need}")
    return (np.arange(samples) + 0.5) * segment.length / samples


def restrict_to_curve(u: Eigenfunction, segment: CurveSegment, samples: int) -> CurveSamples:
    s = _curve_nodes(u, segment, samples)
    return CurveSamples(s, u(*segment.point(s)), segment.length, u.lam, segment.closed)


def normal_derivative_on_curve(u: Eigenfunction, segment: CurveSegment, samples: int) -> CurveSamples:
    """Samples of ``lam^-1 du/dn`` along the curve, ``n`` its unit normal."""
    s = _curve_nodes(u, segment, samples)
    a, b = segment.point(s)
    na, nb = segment.normal(s)
    ga, gb = u.gradient(a, b)
    return CurveSamples(s, (na * ga + nb * gb) / u.lam, segment.length, u.lam, segment.closed)


# -- eigen-equation residual -------------------------------------------------------

def laplacian_residual(u: Eigenfunction, resolution: int) -> float:
    """||Lap_h u + lam^2 u|| / (lam^2 ||u||) with the second-order
    finite-volume Laplacian on the node-centred grid (area-weighted norm)."""
    v = u.on_grid(resolution)
    a_ax, b_ax = u.surface.grid_axes(resolution)
    ha = a_ax[1] - a_ax[0]
    hb = b_ax[1] - b_ax[0]
    d2b = (np.roll(v, -1, 1) - 2 * v + np.roll(v, 1, 1)) / hb**2
    if u.surface.is_torus:
        lap = (np.roll(v, -1, 0) - 2 * v + np.roll(v, 1, 0)) / ha**2 + d2b
        w = np.ones_like(v)
    else:
        # flux form; the pole faces have zero area so no ghost rows are needed
        theta = a_ax[:, None]
        faces = np.sin(np.concatenate([[0.0], 0.5 * (a_ax[1:] + a_ax[:-1]), [0.0]]))[:, None]
        up = np.vstack([v[1:] - v[:-1], np.zeros((1, v.shape[1]))])
        down = np.vstack([np.zeros((1, v.shape[1])), v[1:] - v[:-1]])
        lap = (faces[1:] * up - faces[:-1] * down) / (ha**2 * np.sin(theta)) + d2b / np.sin(theta) ** 2
        w = np.sin(theta) * np.ones_like(v)
    r = lap + u.lam**2 * v
    return float(np.sqrt(np.sum(w * r * r) / np.sum(w * v * v)) / u.lam**2)


__all__ = [
    "Parity", "CoefficientLaw", "TorusMode", "SphereMode", "EnsembleSpec", "Eigenfunction",
    "CurveSamples", "legendre_normalized", "classify_parity", "explicit_eigenfunction",
    "lattice_points", "lattice_directions", "eigenspace_basis", "draw_coefficients",
    "ensemble_eigenfunction", "write_manifest", "read_manifest", "restrict_to_curve",
    "normal_derivative_on_curve", "laplacian_residual", "min_samples",
]
