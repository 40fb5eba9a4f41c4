"""Model surfaces with an orientation-reversing isometric involution.

Two surfaces ship: the flat torus ``[0, a) x [0, b)`` with intrinsic
coordinates ``(x, y)`` and the unit round sphere with colatitude/longitude
``(theta, phi)``.  Every sampling grid in the package is node-centred (nodes
sit half a cell from the cell boundaries); the fixed locus of the involution
then runs along cell boundaries of the second coordinate axis and the sphere
poles are never sampled.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import pi
from typing import Callable

import numpy as np

from ._components import label_periodic
from .errors import ChartOverlapError, ConfigurationError


class SurfaceKind(enum.Enum):
    FLAT_TORUS = "torus"
    ROUND_SPHERE = "sphere"


@dataclass(frozen=True)
class CurveSegment:
    """Unit-speed curve on a surface, parameterized by arc length on [0, length].

    ``point(s)`` returns intrinsic coordinates; ``normal(s)`` returns the
    coordinate components of the unit normal, all pointing to the same side
    of the fixed locus.  ``offset`` locates the segment inside the closed
    fixed-locus component it belongs to.
    """

    name: str
    length: float
    component: int
    point: Callable = field(repr=False, compare=False)
    normal: Callable = field(repr=False, compare=False)
    closed: bool = False
    offset: float = 0.0


@dataclass(frozen=True)
class SurfaceModel:
    kind: SurfaceKind
    genus: int
    sides: tuple = (1.0, 1.0)
    fixed_locus: tuple = ()
    liouville_normalizer: float = 2 * pi
    components: tuple = field(default=(), repr=False)

    # -- intrinsic geometry -------------------------------------------------
    @property
    def is_torus(self):
        return self.kind is SurfaceKind.FLAT_TORUS

    @property
    def area(self):
        if self.is_torus:
            return self.sides[0] * self.sides[1]
        return 4 * pi

    @property
    def diameter(self):
        if self.is_torus:
            return 0.5 * float(np.hypot(*self.sides))
        return pi

    def involution(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.is_torus:
            return a, np.mod(-b, self.sides[1])
        return a, np.mod(-b, 2 * pi)

    def metric(self, a, b):
        """Coefficients (g11, g12, g22) of the metric in intrinsic coordinates."""
        a = np.asarray(a, dtype=float)
        ones = np.ones_like(a + np.asarray(b, dtype=float))
        if self.is_torus:
            return ones, 0.0 * ones, ones
        return ones, 0.0 * ones, np.sin(a) ** 2 * ones

    def side_label(self, a, b):
        """+1 / -1 on the two sides of the fixed locus, 0 on it."""
        b = np.asarray(b, dtype=float)
        if self.is_torus:
            return np.sign(np.sin(2 * pi * b / self.sides[1])) + 0 * np.asarray(a)
        return np.sign(np.sin(b)) + 0 * np.asarray(a)

    def grid_shape(self, resolution):
        if self.is_torus:
            return resolution, resolution
        return resolution, 2 * resolution

    def grid_axes(self, resolution):
        """Node-centred 1-D coordinate arrays of the sampling grid."""
        n0, n1 = self.grid_shape(resolution)
        if self.is_torus:
            a = (np.arange(n0) + 0.5) * self.sides[0] / n0
            b = (np.arange(n1) + 0.5) * self.sides[1] / n1
        else:
            a = (np.arange(n0) + 0.5) * pi / n0
            b = (np.arange(n1) + 0.5) * 2 * pi / n1
        return a, b

    def sample_grid(self, resolution):
        a, b = self.grid_axes(resolution)
        return np.meshgrid(a, b, indexing="ij")

    def fix_columns(self, resolution):
        """Indices j such that the fixed locus runs between grid columns j-1 and j."""
        n1 = self.grid_shape(resolution)[1]
        return (0, n1 // 2)

    def component_curve(self, index):
        return self.components[index]


def _torus_segments(a, b):
    def line(y0):
        return lambda s: (np.mod(np.asarray(s, dtype=float), a), np.full_like(np.asarray(s, dtype=float), y0))

    def normal(s):
        s = np.asarray(s, dtype=float)
        return np.zeros_like(s), np.ones_like(s)

    segs = tuple(
        CurveSegment(f"y={y0:g}", a, i, line(y0), normal, closed=True)
        for i, y0 in enumerate((0.0, 0.5 * b))
    )
    return segs, segs


def _sphere_segments():
    def meridian0(s):
        s = np.asarray(s, dtype=float)
        return s, np.zeros_like(s)

    def meridian_pi(s):
        s = np.asarray(s, dtype=float)
        return pi - s, np.full_like(s, pi)

    # unit normal is +e_y in R^3: +phi direction on phi=0, -phi direction on phi=pi
    def normal0(s):
        s = np.asarray(s, dtype=float)
        return np.zeros_like(s), 1.0 / np.sin(s)

    def normal_pi(s):
        s = np.asarray(s, dtype=float)
        return np.zeros_like(s), -1.0 / np.sin(pi - s)

    def circle(s):
        s = np.mod(np.asarray(s, dtype=float), 2 * pi)
        upper = s <= pi
        return np.where(upper, s, 2 * pi - s), np.where(upper, 0.0, pi)

    def circle_normal(s):
        s = np.mod(np.asarray(s, dtype=float), 2 * pi)
        upper = s <= pi
        theta = np.where(upper, s, 2 * pi - s)
        return np.zeros_like(s), np.where(upper, 1.0, -1.0) / np.sin(theta)

    segs = (
        CurveSegment("phi=0", pi, 0, meridian0, normal0, closed=False, offset=0.0),
        CurveSegment("phi=pi", pi, 0, meridian_pi, normal_pi, closed=False, offset=pi),
    )
    great = (CurveSegment("great circle phi in {0, pi}", 2 * pi, 0, circle, circle_normal, closed=True),)
    return segs, great


def make_surface(kind, params=None) -> SurfaceModel:
    """Build a model surface.

    ``kind`` is ``"torus"`` or ``"sphere"`` (or a :class:`SurfaceKind`).
    Torus ``params`` may carry ``sides=(a, b)``; the sphere only accepts
    ``radius=1``.
    """
    params = dict(params or {})
    try:
        kind = SurfaceKind(kind) if not isinstance(kind, SurfaceKind) else kind
    except ValueError:
        raise ConfigurationError(f"unsupported surface kind {kind!r}") from None
    if kind is SurfaceKind.FLAT_TORUS:
        a, b = (float(v) for v in params.pop("sides", (1.0, 1.0)))
        if params:
            raise ConfigurationError(f"unknown torus parameters {sorted(params)}")
        if a <= 0 or b <= 0:
            raise ConfigurationError("torus side lengths must be positive")
        segs, comps = _torus_segments(a, b)
        return SurfaceModel(kind, 1, (a, b), segs, a * b * 2 * pi, comps)
    radius = float(params.pop("radius", 1.0))
    if params:
        raise ConfigurationError(f"unknown sphere parameters {sorted(params)}")
    if radius != 1.0:
        raise ConfigurationError("only the unit sphere is supported")
    segs, comps = _sphere_segments()
    return SurfaceModel(kind, 0, (pi, 2 * pi), segs, 4 * pi * 2 * pi, comps)


# -- invariant checks --------------------------------------------------------

def involution_error(surface, resolution=64):
    """max |tau(tau(p)) - p| over the sample grid (periodic distance)."""
    a, b = surface.sample_grid(resolution)
    a2, b2 = surface.involution(*surface.involution(a, b))
    period = surface.sides[1]
    db = np.abs(np.mod(b2 - b + 0.5 * period, period) - 0.5 * period)
    return float(max(np.abs(a2 - a).max(), db.max()))


def isometry_error(surface, resolution=64):
    """Max deviation between g and its pullback through tau (d tau = diag(1, -1))."""
    a, b = surface.sample_grid(resolution)
    g = surface.metric(a, b)
    ta, tb = surface.involution(a, b)
    h = surface.metric(ta, tb)
    pulled = (h[0], -h[1], h[2])
    return float(max(np.abs(p - q).max() for p, q in zip(pulled, g)))


def grid_involution_error(surface, resolution=64):
    """Distance from tau(node) to the nearest grid node, maximized over nodes."""
    a_ax, b_ax = surface.grid_axes(resolution)
    a, b = np.meshgrid(a_ax, b_ax, indexing="ij")
    _, tb = surface.involution(a, b)
    step = b_ax[1] - b_ax[0]
    frac = (tb - b_ax[0]) / step
    return float(np.abs(frac - np.round(frac)).max() * step)


def fixed_locus_components(surface, resolution=256):
    """Component count of the sample grid after cutting along the fixed locus.

    Adjacency is 4-neighbour with the surface identifications (torus wraps in
    both axes, sphere wraps in longitude).  Cutting removes the grid edges that
    cross the fixed locus, i.e. the column boundaries ``fix_columns``.
    """
    n0, n1 = surface.grid_shape(resolution)
    cuts = sorted(surface.fix_columns(resolution))
    bands = [(cuts[i], cuts[i + 1] if i + 1 < len(cuts) else n1) for i in range(len(cuts))]
    count = 0
    for lo, hi in bands:
        _, n = label_periodic(np.ones((n0, hi - lo), dtype=bool), wrap0=surface.is_torus)
        count += n
    return count


def side_exchange_ok(surface, resolution=64):
    a, b = surface.sample_grid(resolution)
    s = surface.side_label(a, b)
    ts = surface.side_label(*surface.involution(a, b))
    off = s != 0
    return bool(np.all(ts[off] == -s[off]))


def curve_speed_error(segment, surface, n=256, h=1e-6):
    """Max | |d point / ds|_g - 1 | by central differences at cell midpoints
    (even ``n`` keeps the samples off the sphere poles)."""
    s = (np.arange(n) + 0.5) * segment.length / n
    a1, b1 = segment.point(s + h)
    a0, b0 = segment.point(s - h)
    da = a1 - a0
    if surface.is_torus:
        da = np.mod(da + 0.5 * surface.sides[0], surface.sides[0]) - 0.5 * surface.sides[0]
    da = da / (2 * h)
    period = surface.sides[1]
    db = (np.mod(b1 - b0 + 0.5 * period, period) - 0.5 * period) / (2 * h)
    a, b = segment.point(s)
    g11, g12, g22 = surface.metric(a, b)
    speed = np.sqrt(g11 * da**2 + 2 * g12 * da * db + g22 * db**2)
    return float(np.abs(speed - 1).max())


def curve_fix_error(segment, surface, n=257):
    s = np.linspace(0, segment.length, n)
    a, b = segment.point(s)
    ta, tb = surface.involution(a, b)
    period = surface.sides[1]
    db = np.abs(np.mod(tb - b + 0.5 * period, period) - 0.5 * period)
    return float(max(np.abs(ta - a).max(), db.max()))


# -- Fermi charts --------------------------------------------------------------

@dataclass(frozen=True)
class FermiChart:
    """Fermi coordinates (t, n) around a fixed-locus segment.

    ``t`` is arc length along the base segment and ``n`` the signed geodesic
    distance, positive on the side the segment normal points to.
    """

    surface: SurfaceModel
    base: CurveSegment
    eps: float

    def to_surface(self, t, n):
        t = np.asarray(t, dtype=float)
        n = np.asarray(n, dtype=float)
        if self.surface.is_torus:
            a, b = self.base.point(t)
            return a, np.mod(b + n, self.surface.sides[1])
        theta, phi = self.base.point(t)
        # base point p = (sin th cos ph, sin th sin ph, cos th) on a meridian, normal e_y
        p = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
        ey = np.array([0.0, 1.0, 0.0]).reshape(3, *([1] * t.ndim))
        q = np.cos(n) * p + np.sin(n) * ey
        th = np.arccos(np.clip(q[2], -1.0, 1.0))
        ph = np.mod(np.arctan2(q[1], q[0]), 2 * pi)
        return th, ph

    def metric_coefficients(self, t, n):
        """Second-order coefficients (b20, b02, b11) of -Laplacian in (n, t).

        ``b20`` multiplies (d_n / i)^2, ``b02`` (d_t / i)^2.
        """
        t = np.asarray(t, dtype=float)
        n = np.asarray(n, dtype=float)
        ones = np.ones(np.broadcast(t, n).shape)
        if self.surface.is_torus:
            return ones, ones.copy(), 0.0 * ones
        return ones, ones / np.cos(n) ** 2, 0.0 * ones

    def first_order_coefficients(self, t, n):
        """Coefficients (b10, b01) of (d_n / i) and (d_t / i) in -Laplacian."""
        n = np.asarray(n, dtype=float) + 0.0 * np.asarray(t, dtype=float)
        if self.surface.is_torus:
            return 0.0 * n, 0.0 * n
        # -Lap = -d_n^2 + tan(n) d_n - sec^2(n) d_t^2
        return 1j * np.tan(n), 0.0 * n


def fermi_chart(surface: SurfaceModel, segment: CurveSegment, eps: float) -> FermiChart:
    if eps <= 0:
        raise ChartOverlapError("chart half-width must be positive")
    limit = 0.25 * surface.sides[1] if surface.is_torus else pi / 4
    if eps >= limit:
        raise ChartOverlapError(f"half-width {eps} exceeds the injectivity bound {limit:g}")
    return FermiChart(surface, segment, float(eps))


def pulled_back_metric(chart: FermiChart, t, n, h=1e-5):
    """Numerical metric (g_tt, g_tn, g_nn) of the chart, by finite differences
    of the surface embedding (flat plane or unit sphere in R^3)."""

    def embed(tt, nn):
        if chart.surface.is_torus:
            a, b = chart.base.point(tt)
            return np.stack([a, b + nn])
        a, b = chart.to_surface(tt, nn)
        return np.stack([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)])

    def diff(p, q):
        d = p - q
        if chart.surface.is_torus:
            # differences of periodic coordinates are taken modulo the sides
            period = np.array(chart.surface.sides).reshape(2, *([1] * (d.ndim - 1)))
            d = np.mod(d + 0.5 * period, period) - 0.5 * period
        return d

    dt = diff(embed(t + h, n), embed(t - h, n)) / (2 * h)
    dn = diff(embed(t, n + h), embed(t, n - h)) / (2 * h)
    return (dt * dt).sum(0), (dt * dn).sum(0), (dn * dn).sum(0)
