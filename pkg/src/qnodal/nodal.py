"""Nodal domains and the nodal graph of ``Z_u`` together with the fixed locus.

Discretization: grid nodes are treated as pixels carrying the sign of ``u``.
The graph lives on the dual corner lattice: a pixel side belongs to the graph
when the signs on its two sides differ (a nodal side) or when it lies on the
fixed locus.  Fixed-locus lines run along pixel sides because sample grids are
node-centred.  On the sphere every corner of the polar rows collapses to a
single pole corner.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from math import ceil, pi

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._components import label_periodic
from .errors import DegenerateTraceError, ResolutionError
from .spectra import CurveSamples, Eigenfunction

EXPLICIT_ZERO_BAND = 1e-9
ENSEMBLE_ZERO_BAND = 1e-6
DEGENERATE_FRACTION = 0.5

REPORT_COLUMNS = ["id", "lambda", "parity", "resolution", "N", "fix_crossings", "euler_bound", "stable"]


def default_zero_band(u: Eigenfunction):
    return ENSEMBLE_ZERO_BAND if u.is_ensemble else EXPLICIT_ZERO_BAND


def min_resolution(u: Eigenfunction):
    return int(ceil(16 * u.lam * u.surface.diameter))


@dataclass(frozen=True)
class SignGrid:
    signs: np.ndarray  # int8 in {-1, 0, 1}
    spacing: tuple
    zero_band: float

    @property
    def shape(self):
        return self.signs.shape


def sign_grid(values, spacing=(1.0, 1.0), zero_band=EXPLICIT_ZERO_BAND) -> SignGrid:
    values = np.asarray(values, dtype=float)
    cut = zero_band * np.abs(values).max()
    s = np.sign(values).astype(np.int8)
    s[np.abs(values) < cut] = 0
    return SignGrid(s, tuple(spacing), zero_band)


def _grid_for(u, resolution, zero_band, check=True):
    if check and resolution < min_resolution(u):
        raise ResolutionError(f"resolution {resolution} below {min_resolution(u)} for lambda={u.lam:.4g}")
    a_ax, b_ax = u.surface.grid_axes(resolution)
    band = default_zero_band(u) if zero_band is None else zero_band
    return sign_grid(u.on_grid(resolution), (a_ax[1] - a_ax[0], b_ax[1] - b_ax[0]), band)


def domain_count(grid: SignGrid, surface) -> int:
    """4-connected components of {sign != 0} with the surface identifications."""
    total = 0
    for s in (1, -1):
        _, n = label_periodic(grid.signs == s, wrap0=surface.is_torus, wrap1=True)
        total += n
    return total


@dataclass
class NodalReport:
    ident: str
    lam: float
    parity: str
    resolution: int
    count: int
    fix_crossings: int | None = None
    euler_bound: int | None = None
    stable: bool | None = None
    warnings: list = field(default_factory=list)

    def row(self):
        return [self.ident, f"{self.lam:.12g}", self.parity, self.resolution, self.count,
                "" if self.fix_crossings is None else self.fix_crossings,
                "" if self.euler_bound is None else self.euler_bound,
                "" if self.stable is None else str(self.stable).lower()]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def _ident(u):
    if u.spec is not None:
        s = u.spec
        return f"{s.surface}:{s.selector}:{s.parity.value}:{s.seed}"
    return f"{u.surface.kind.value}:" + "+".join(m.label().replace(" ", "_") for m in u.modes)


def count_nodal_domains(u: Eigenfunction, surface=None, resolution=1024, zero_band=None,
                        check_stability=True, check_resolution=True) -> NodalReport:
    """Nodal-domain count on the sample grid; with ``check_stability`` the count
    is repeated at twice the resolution and a warning attached if it moves."""
    surface = surface or u.surface
    count = domain_count(_grid_for(u, resolution, zero_band, check_resolution), surface)
    rep = NodalReport(_ident(u), u.lam, u.parity.value, resolution, count)
    if check_stability:
        fine = domain_count(_grid_for(u, 2 * resolution, zero_band, check_resolution), surface)
        rep.stable = fine == count
        if not rep.stable:
            msg = f"nodal count changed from {count} to {fine} under resolution doubling"
            rep.warnings.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return rep


# -- nodal graph --------------------------------------------------------------------

@dataclass(frozen=True)
class NodalGraph:
    """Graph of ``Z_u`` together with the fixed locus.

    Vertices are corners of degree other than 2 plus one marker vertex (with a
    self-loop) for every component all of whose corners have degree 2.
    ``lattice_chi`` is corners minus sides of the underlying lattice graph; it
    equals ``V - E`` and serves as a consistency check.
    """

    vertex_pos: np.ndarray
    vertex_kind: np.ndarray
    vertex_degree: np.ndarray
    n_edges: int
    faces: int
    components: int
    genus: int
    nodal_domains: int
    fix_crossings: int
    singular_points: int
    lattice_chi: int

    @property
    def n_vertices(self):
        return int(self.vertex_pos.shape[0])

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.faces - self.components

    def euler_ok(self):
        return self.euler_characteristic >= 1 - 2 * self.genus


class _CornerLattice:
    """Index bookkeeping for the corner lattice of an ``n0 x n1`` pixel grid."""

    def __init__(self, surface, shape):
        self.torus = surface.is_torus
        self.n0, self.n1 = shape
        self.n_corners = self.n0 * self.n1 if self.torus else (self.n0 - 1) * self.n1 + 2

    def corner(self, i, j):
        i = np.asarray(i)
        j = np.mod(j, self.n1)
        if self.torus:
            return np.mod(i, self.n0) * self.n1 + j
        south = (self.n0 - 1) * self.n1 + 1
        return np.where(i <= 0, 0, np.where(i >= self.n0, south, 1 + (i - 1) * self.n1 + j))

    def position(self, idx, spacing):
        idx = np.asarray(idx)
        ha, hb = spacing
        if self.torus:
            return np.stack([(idx // self.n1) * ha, (idx % self.n1) * hb], axis=-1)
        south = (self.n0 - 1) * self.n1 + 1
        i = np.where(idx == 0, 0, np.where(idx == south, self.n0, (idx - 1) // self.n1 + 1))
        j = np.where((idx == 0) | (idx == south), 0, (idx - 1) % self.n1)
        return np.stack([i * ha, j * hb], axis=-1)


def _fix_sides_degenerate(signs, cols, surface):
    """Fraction of fixed-locus sides crossed by the nodal set, per component."""
    fractions = []
    groups = [cols] if not surface.is_torus else [[c] for c in cols]
    for group in groups:
        changed = []
        for c in group:
            left = signs[:, (c - 1) % signs.shape[1]]
            right = signs[:, c]
            changed.append((left != right) | (left == 0) | (right == 0))
        fractions.append(float(np.mean(np.concatenate(changed))))
    return fractions


def build_nodal_graph(u: Eigenfunction, surface=None, resolution=512, zero_band=None,
                      check_resolution=True) -> NodalGraph:
    surface = surface or u.surface
    grid = _grid_for(u, resolution, zero_band, check_resolution)
    return graph_from_signs(grid, surface)


def graph_from_signs(grid: SignGrid, surface) -> NodalGraph:
    s = grid.signs
    n0, n1 = s.shape
    lat = _CornerLattice(surface, s.shape)
    cols = sorted(set(surface.fix_columns(n0)))
    for frac in _fix_sides_degenerate(s, cols, surface):
        if frac > DEGENERATE_FRACTION:
            raise DegenerateTraceError(
                f"nodal set covers {100 * frac:.0f}% of a fixed-locus component")

    ii, jj = np.meshgrid(np.arange(n0), np.arange(n1), indexing="ij")
    # A-sides: between pixels (i, j-1) and (i, j); corners (i, j) -> (i+1, j)
    za = s != np.roll(s, 1, axis=1)
    fa = np.zeros_like(za)
    fa[:, cols] = True
    ga = za | fa
    a0 = lat.corner(ii[ga], jj[ga])
    a1 = lat.corner(ii[ga] + 1, jj[ga])
    a_is_z = (za & ~fa)[ga]
    # B-sides: between pixels (i-1, j) and (i, j); corners (i, j) -> (i, j+1)
    if surface.is_torus:
        zb = s != np.roll(s, 1, axis=0)
        bi, bj = ii[zb], jj[zb]
    else:
        zb = s[1:] != s[:-1]
        bi, bj = ii[1:][zb], jj[1:][zb]
    b0 = lat.corner(bi, bj)
    b1 = lat.corner(bi, bj + 1)

    e0 = np.concatenate([a0, b0]).astype(np.int64)
    e1 = np.concatenate([a1, b1]).astype(np.int64)
    is_z = np.concatenate([a_is_z, np.ones(b0.size, dtype=bool)])
    nc = lat.n_corners
    deg = np.bincount(e0, minlength=nc) + np.bincount(e1, minlength=nc)
    zdeg = np.bincount(e0[is_z], minlength=nc) + np.bincount(e1[is_z], minlength=nc)

    fix_corner = np.zeros(nc, dtype=bool)
    rows = np.arange(n0 + (0 if surface.is_torus else 1))
    for c in cols:
        fix_corner[lat.corner(rows, np.full_like(rows, c))] = True

    active = deg > 0
    adj = coo_matrix((np.ones(e0.size), (e0, e1)), shape=(nc, nc))
    _, comp = connected_components(adj, directed=False)
    act_comp = comp[active]
    uniq, dense = np.unique(act_comp, return_inverse=True)
    m = int(uniq.size)
    irregular = np.bincount(dense, weights=(deg[active] != 2).astype(float), minlength=m)
    loop_comps = np.flatnonzero(irregular == 0)

    vert = np.flatnonzero(active & (deg != 2))
    # one representative corner per all-degree-2 component
    act_idx = np.flatnonzero(active)
    first = np.full(m, -1)
    first[dense[::-1]] = act_idx[::-1]
    markers = first[loop_comps]

    kinds = np.where(fix_corner[vert], "fix_intersection", "singular")
    pos = np.concatenate([lat.position(vert, grid.spacing), lat.position(markers, grid.spacing)])
    kind = np.concatenate([kinds, np.full(markers.size, "marker")])
    vdeg = np.concatenate([deg[vert], np.full(markers.size, 2)])
    n_edges = int(deg[vert].sum() // 2 + markers.size)

    fix_cross = int(np.count_nonzero(fix_corner & (zdeg > 0)))
    sing_mask = (~fix_corner) & (deg >= 3)
    singular = _cluster_count(lat, sing_mask)
    faces = _face_count(s, surface, cols)
    domains = domain_count(grid, surface)
    chi = int(np.count_nonzero(active)) - int(e0.size)
    return NodalGraph(pos, kind, vdeg, n_edges, faces, m, surface.genus, domains,
                      fix_cross, singular, chi)


def _cluster_count(lat, mask):
    """Number of 8-connected clusters of flagged corners."""
    if not mask.any():
        return 0
    if lat.torus:
        img = mask.reshape(lat.n0, lat.n1)
        _, n = ndimage.label(img, structure=np.ones((3, 3)))
        return int(n)
    inner = mask[1:-1].reshape(lat.n0 - 1, lat.n1)
    _, n = ndimage.label(inner, structure=np.ones((3, 3)))
    return int(n + mask[0] + mask[-1])


def _face_count(s, surface, cols):
    """Components of the complement of the graph: same-sign pixels within the
    bands bounded by fixed-locus columns."""
    n1 = s.shape[1]
    edges = list(cols) + [n1]
    count = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        band = s[:, lo:hi]
        for v in (-1, 0, 1):
            _, n = label_periodic(band == v, wrap0=surface.is_torus)
            count += n
    return count


def euler_lower_bound(graph: NodalGraph):
    """Returns ``(bound, passed)`` with bound = ceil(#(Z cap Fix) / 2) + 1 - genus."""
    bound = int(ceil(graph.fix_crossings / 2)) + 1 - graph.genus
    return bound, graph.nodal_domains >= bound


def nodal_report(u: Eigenfunction, resolution=512, zero_band=None, check_stability=False):
    """Domain count, fixed-locus crossings and Euler bound in one record."""
    graph = build_nodal_graph(u, resolution=resolution, zero_band=zero_band)
    bound, _ = euler_lower_bound(graph)
    rep = NodalReport(_ident(u), u.lam, u.parity.value, resolution, graph.nodal_domains,
                      graph.fix_crossings, bound)
    if check_stability:
        fine = domain_count(_grid_for(u, 2 * resolution, zero_band), u.surface)
        rep.stable = fine == graph.nodal_domains
        if not rep.stable:
            rep.warnings.append(f"nodal count changed from {graph.nodal_domains} to {fine}")
    return rep, graph


# -- sign changes along curves ---------------------------------------------------------

def count_sign_changes_on_segment(trace, zero_band=EXPLICIT_ZERO_BAND, closed=None) -> int:
    """Strict sign alternations of sampled values after dropping near-zeros.

    ``trace`` is a :class:`CurveSamples` or an array; ``closed`` (default: the
    trace's own flag) also counts the change between the last and first sample.
    """
    if isinstance(trace, CurveSamples):
        values = trace.values
        closed = trace.closed if closed is None else closed
    else:
        values = np.asarray(trace, dtype=float)
    peak = np.abs(values).max() if values.size else 0.0
    if peak == 0.0:
        raise DegenerateTraceError("trace vanishes identically")
    kept = np.sign(values[np.abs(values) >= zero_band * peak])
    n = int(np.count_nonzero(kept[1:] != kept[:-1]))
    if closed and kept.size > 1 and kept[0] != kept[-1]:
        n += 1
    return n


# -- marching squares ---------------------------------------------------------------------

@dataclass
class NodalSet:
    polylines: list
    degenerate_cells: np.ndarray
    closed: list

    def __len__(self):
        return len(self.polylines)

    def to_path_text(self):
        blocks = []
        for line in self.polylines:
            blocks.append("\n".join(f"{p[0]:.12g} {p[1]:.12g}" for p in line))
        return "\n\n".join(blocks) + "\n"


def extract_nodal_set(u: Eigenfunction, surface=None, resolution=256, zero_band=None,
                      check_resolution=False) -> NodalSet:
    surface = surface or u.surface
    if check_resolution and resolution < min_resolution(u):
        raise ResolutionError(f"resolution {resolution} below {min_resolution(u)}")
    a_ax, b_ax = surface.grid_axes(resolution)
    v = u.on_grid(resolution)
    band = default_zero_band(u) if zero_band is None else zero_band
    return marching_squares(v, a_ax, b_ax, surface, band)


def marching_squares(v, a_ax, b_ax, surface, zero_band=EXPLICIT_ZERO_BAND) -> NodalSet:
    """Zero contours of ``v`` on a periodic node grid.

    Cells whose four corners all lie in the zero band are flagged and skipped.
    Saddle cells with a (near) zero centre value are resolved as two straight
    crossing segments, so transversal nodal crossings stay connected.
    """
    n0, n1 = v.shape
    ha, hb = a_ax[1] - a_ax[0], b_ax[1] - b_ax[0]
    wrap0 = surface.is_torus
    rows = n0 if wrap0 else n0 - 1
    peak = np.abs(v).max()
    tol = zero_band * peak
    inside = v >= 0

    def nb(i):
        return (i + 1) % n0

    # edge ids: horizontal (i, j)-(i, j+1) -> i*n1+j ; vertical (i, j)-(i+1, j) -> n0*n1 + i*n1+j
    def hid(i, j):
        return i * n1 + (j % n1)

    def vid(i, j):
        return n0 * n1 + i * n1 + (j % n1)

    points = {}

    def point(eid):
        if eid in points:
            return points[eid]
        if eid < n0 * n1:
            i, j = divmod(eid, n1)
            v0, v1 = v[i, j], v[i, (j + 1) % n1]
            t = v0 / (v0 - v1)
            p = (a_ax[i], b_ax[j] + t * hb)
        else:
            i, j = divmod(eid - n0 * n1, n1)
            v0, v1 = v[i, j], v[nb(i), j]
            t = v0 / (v0 - v1)
            p = (a_ax[i] + t * ha, b_ax[j])
        points[eid] = p
        return p

    c00 = inside[:rows]
    c10 = np.roll(inside, -1, 0)[:rows]
    c01 = np.roll(inside, -1, 1)[:rows]
    c11 = np.roll(np.roll(inside, -1, 0), -1, 1)[:rows]
    code = c00 * 1 + c01 * 2 + c11 * 4 + c10 * 8
    small = np.abs(v) < tol
    degenerate = (small[:rows] & np.roll(small, -1, 0)[:rows] & np.roll(small, -1, 1)[:rows]
                  & np.roll(np.roll(small, -1, 0), -1, 1)[:rows])
    active = (code != 0) & (code != 15) & ~degenerate
    links = []
    for i, j in zip(*np.nonzero(active)):
        i = int(i)
        j = int(j)
        bottom, top = hid(i, j), hid(nb(i), j)  # edges at rows i and i+1
        left, right = vid(i, j), vid(i, j + 1)
        cross = []
        if c00[i, j] != c01[i, j]:
            cross.append(bottom)
        if c01[i, j] != c11[i, j]:
            cross.append(right)
        if c11[i, j] != c10[i, j]:
            cross.append(top)
        if c10[i, j] != c00[i, j]:
            cross.append(left)
        if len(cross) == 2:
            links.append((cross[0], cross[1]))
            continue
        centre = 0.25 * (v[i, j] + v[i, (j + 1) % n1] + v[nb(i), j] + v[nb(i), (j + 1) % n1])
        if abs(centre) <= tol:
            links += [(bottom, top), (left, right)]
        elif (centre >= 0) == bool(c00[i, j]):
            # c00 joined to the centre: cut off the corners c01 and c10
            links += [(bottom, right), (top, left)]
        else:
            links += [(bottom, left), (top, right)]

    adj = {}
    for p, q in links:
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)
    seen = set()
    lines, closed = [], []
    # open chains first (start at degree-1 ends), then cycles
    starts = [e for e, nbrs in adj.items() if len(nbrs) == 1] + list(adj)
    for start in starts:
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [w for w in adj[cur] if w != prev and w not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            chain.append(cur)
            seen.add(cur)
        is_closed = len(chain) > 2 and start in adj[chain[-1]]
        pts = np.array([point(e) for e in chain])
        if is_closed:
            pts = np.vstack([pts, pts[:1]])
        lines.append(pts)
        closed.append(is_closed)
    if not surface.is_torus:
        lines, closed = _join_through_poles(lines, closed, a_ax, ha)
    return NodalSet(lines, np.argwhere(degenerate), closed)


def _join_through_poles(lines, closed, a_ax, ha):
    """Join open chains that end in the polar rows at antipodal longitudes."""
    out_lines, out_closed = [], []
    open_idx = [k for k, c in enumerate(closed) if not c]
    used = set()
    for k in range(len(lines)):
        if closed[k]:
            out_lines.append(lines[k])
            out_closed.append(True)
    ends = []
    for k in open_idx:
        for which in (0, -1):
            th, ph = lines[k][which]
            pole = 0 if th < a_ax[0] + ha else (1 if th > a_ax[-1] - ha else None)
            if pole is not None:
                ends.append((k, which, pole, ph))
    partner = {}
    for x in range(len(ends)):
        for y in range(x + 1, len(ends)):
            k1, w1, p1, ph1 = ends[x]
            k2, w2, p2, ph2 = ends[y]
            if p1 != p2 or (k1, w1) in partner or (k2, w2) in partner:
                continue
            d = abs(np.mod(ph1 - ph2, 2 * pi) - pi)
            if d < 4 * ha:
                partner[(k1, w1)] = (k2, w2, p1)
                partner[(k2, w2)] = (k1, w1, p1)
    for k in open_idx:
        if k in used:
            continue
        # walk to an end of the composite chain, then traverse it
        chain_ids, cur, entry = [], k, 0
        visited = {k}
        while (cur, entry) in partner:
            nk, nw, _ = partner[(cur, entry)]
            if nk in visited:
                break
            visited.add(nk)
            cur, entry = nk, (-1 if nw == 0 else 0)
        start, start_end = cur, entry
        pieces = []
        cur, enter = start, start_end
        visited = set()
        is_closed = False
        while True:
            visited.add(cur)
            seg = lines[cur] if enter == 0 else lines[cur][::-1]
            pieces.append(seg)
            exit_end = -1 if enter == 0 else 0
            if (cur, exit_end) not in partner:
                break
            nk, nw, pole = partner[(cur, exit_end)]
            pieces.append(np.array([[0.0 if pole == 0 else pi, seg[-1][1]]]))
            if nk in visited:
                is_closed = True
                break
            cur, enter = nk, nw
        used |= visited
        out_lines.append(np.vstack(pieces))
        out_closed.append(is_closed)
    return out_lines, out_closed


__all__ = [
    "SignGrid", "sign_grid", "NodalReport", "NodalGraph", "NodalSet", "domain_count",
    "count_nodal_domains", "build_nodal_graph", "graph_from_signs", "euler_lower_bound",
    "nodal_report", "count_sign_changes_on_segment", "extract_nodal_set", "marching_squares",
    "reports_to_csv", "min_resolution", "REPORT_COLUMNS",
]
