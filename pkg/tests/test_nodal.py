import numpy as np
import pytest

from qnodal.errors import DegenerateTraceError, ResolutionError
from qnodal.geometry import make_surface
from qnodal.nodal import (REPORT_COLUMNS, build_nodal_graph, count_nodal_domains, count_sign_changes_on_segment,
                          domain_count, euler_lower_bound, extract_nodal_set, min_resolution, nodal_report,
                          reports_to_csv, sign_grid)
from qnodal.spectra import EnsembleSpec, Parity, SphereMode, TorusMode, ensemble_eigenfunction, explicit_eigenfunction

TORUS = make_surface("torus")
SPHERE = make_surface("sphere")


def torus_mode(k, l, kx="cos", ky="cos"):
    return explicit_eigenfunction(TORUS, TorusMode(k, l, kx, ky))


def zonal(l, m=0):
    return explicit_eigenfunction(SPHERE, SphereMode(l, m, "cos"))


def test_sin_sin_chessboard():
    rep = count_nodal_domains(torus_mode(2, 3, "sin", "sin"), resolution=512)
    assert rep.count == 24 and rep.stable


@pytest.mark.parametrize("l", [1, 3, 10])
def test_zonal_bands(l):
    assert count_nodal_domains(zonal(l), resolution=1024).count == l + 1


def test_instability_is_reported():
    u = torus_mode(5, 5)
    with pytest.warns(RuntimeWarning):
        rep = count_nodal_domains(u, resolution=6, check_resolution=False)
    assert rep.stable is False and rep.warnings


def test_sign_grid_zero_band():
    g = sign_grid(np.array([[1.0, 1e-12], [-1.0, 0.5]]), zero_band=1e-9)
    assert g.signs.tolist() == [[1, 0], [-1, 1]]


def test_domain_count_wraps():
    signs = np.ones((4, 4))
    signs[:, 1] = -1
    signs[:, 3] = -1
    g = sign_grid(signs)
    assert domain_count(g, TORUS) == 4
    # on the sphere grid axis 0 is latitude: no wrap, so the same stripes count alike
    assert domain_count(g, SPHERE) == 4


def test_graph_cos_cos_2_3():
    g = build_nodal_graph(torus_mode(2, 3), resolution=512)
    assert (g.n_vertices, g.n_edges, g.faces, g.components) == (32, 64, 32, 1)
    assert g.nodal_domains == 24 and g.fix_crossings == 8
    assert g.euler_characteristic == -1 and g.euler_ok()
    assert euler_lower_bound(g) == (4, True)


def test_graph_rejects_mode_vanishing_on_fix():
    with pytest.raises(DegenerateTraceError):
        build_nodal_graph(torus_mode(2, 3, "sin", "sin"), resolution=512)


def test_graph_zonal_3():
    g = build_nodal_graph(zonal(3), resolution=512)
    assert g.fix_crossings == 6
    assert euler_lower_bound(g) == (4, True) and g.nodal_domains == 4


def test_graph_y32():
    g = build_nodal_graph(zonal(3, 2), resolution=512)
    assert g.nodal_domains == 8 and g.fix_crossings == 4
    assert g.euler_characteristic >= 1


def test_graph_without_fix_zeros():
    # cos(2 pi x): zero lines are vertical circles crossing Fix, so use the y-only mode
    g = build_nodal_graph(torus_mode(0, 2), resolution=512)
    assert g.fix_crossings == 0
    assert euler_lower_bound(g)[0] == 0 and g.euler_ok()


def test_resolution_precondition():
    u = ensemble_eigenfunction(EnsembleSpec("torus", 325, Parity.EVEN, 0))
    assert min_resolution(u) == int(np.ceil(16 * u.lam * TORUS.diameter))
    with pytest.raises(ResolutionError):
        build_nodal_graph(u, resolution=512)


def test_report_row_and_csv():
    rep, g = nodal_report(torus_mode(1, 1), resolution=128)
    text = reports_to_csv([rep])
    header, row = text.strip().split("\n")
    assert header.split(",") == REPORT_COLUMNS
    assert row.split(",")[4] == "4"


@pytest.mark.parametrize("values,closed,expected", [
    (2 * np.cos(4 * np.pi * (np.arange(256) + 0.5) / 256), True, 4),
    (np.ones(64), True, 0),
])
def test_sign_changes(values, closed, expected):
    assert count_sign_changes_on_segment(values, closed=closed) == expected


def test_sign_changes_legendre_trace():
    t = (np.arange(512) + 0.5) * np.pi / 512
    x = np.cos(t)
    assert count_sign_changes_on_segment(0.5 * (5 * x**3 - 3 * x), closed=False) == 3


def test_sign_changes_degenerate():
    with pytest.raises(DegenerateTraceError):
        count_sign_changes_on_segment(np.zeros(10))


def test_marching_squares_examples():
    assert len(extract_nodal_set(torus_mode(0, 1, "cos", "sin"), resolution=64)) == 2
    ns = extract_nodal_set(torus_mode(2, 3, "sin", "sin"), resolution=128)
    assert len(ns) == 10 and all(ns.closed)
    lat = extract_nodal_set(zonal(3), resolution=128)
    assert len(lat) == 3
    heights = sorted(np.cos(np.mean([p[0] for p in line])) for line in lat.polylines)
    assert np.allclose(heights, [-np.sqrt(0.6), 0.0, np.sqrt(0.6)], atol=1e-3)


def test_marching_squares_accuracy():
    ns = extract_nodal_set(torus_mode(2, 3, "sin", "sin"), resolution=128)
    pts = np.concatenate([np.asarray(line) for line in ns.polylines])
    # zeros lie on x = j/4 or y = j/6
    dx = np.abs(pts[:, 0] * 4 - np.round(pts[:, 0] * 4)) / 4
    dy = np.abs(pts[:, 1] * 6 - np.round(pts[:, 1] * 6)) / 6
    assert np.minimum(dx, dy).max() < 1e-3


def test_path_text():
    text = extract_nodal_set(torus_mode(0, 1, "cos", "sin"), resolution=16).to_path_text()
    blocks = text.strip().split("\n\n")
    assert len(blocks) == 2 and all(len(line.split()) == 2 for line in blocks[0].split("\n"))
