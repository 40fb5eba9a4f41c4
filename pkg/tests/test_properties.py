"""Property-based checks of the invariants each module promises."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from qnodal.bochner import (MomentSequence, SpectralProfile, bump_mixture_trace, char_function,
                            default_t_grid, moments_of_profile, psd_test)
from qnodal.config import ExperimentConfig, parse_config, render_config
from qnodal.geometry import make_surface
from qnodal.nodal import build_nodal_graph, count_sign_changes_on_segment, domain_count, sign_grid
from qnodal.psido import FourierSum, TorusSymbol, modulated_kinetic_symbol, pairing, quantize_apply, xi1_squared
from qnodal.restriction import make_window
from qnodal.specfun import ReferenceLaw, arcsine_moment, bessel_j, reference_moment
from qnodal.spectra import EnsembleSpec, Parity, ensemble_eigenfunction

TORUS = make_surface("torus")
SLOW = settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])

ints = st.integers(min_value=0, max_value=10**6)
small_lists = st.lists(ints, min_size=1, max_size=5)
fractions = st.floats(min_value=0.01, max_value=0.99, allow_nan=False)


@given(seeds=small_lists, m=small_lists, tol=fractions, center=fractions,
       experiment=st.sampled_from(["nodal", "rellich", "bochner", "psido", "all"]),
       surface=st.sampled_from(["torus", "sphere"]), parity=st.sampled_from(["even", "odd", "none"]))
def test_config_roundtrip(seeds, m, tol, center, experiment, surface, parity):
    cfg = ExperimentConfig(seeds=seeds, m_values=m, tol_limit=tol, window_center=center,
                           experiment=experiment, surface=surface, parity=parity)
    assert parse_config(render_config(cfg)) == cfg


@given(st.integers(min_value=0, max_value=63))
def test_arcsine_recurrence(m):
    assert abs(arcsine_moment(m + 1) / arcsine_moment(m) - (2 * m + 1) / (2 * m + 2)) < 1e-14


@given(st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=0, max_value=20))
def test_mixture_moments_in_unit_interval(a, m):
    v = reference_moment(ReferenceLaw.mixture(a), m)
    assert 0.0 < v <= 1.0 + 1e-15


def test_mixture_moment_map_is_injective():
    vals = [reference_moment(ReferenceLaw.mixture(a), 1) for a in (0, 0.25, 0.5, 0.75, 1)]
    assert len(set(vals)) == 5


@given(st.floats(min_value=0.0, max_value=40.0))
def test_bessel_derivative_identity(t):
    h = 1e-5
    d = (bessel_j(0, t + h) - bessel_j(0, t - h)) / (2 * h)
    assert abs(d + bessel_j(1, t)) < 1e-7


@SLOW
@given(st.integers(min_value=0, max_value=2**32))
def test_nonnegative_traces_are_positive_definite(seed):
    tr = bump_mixture_trace(np.random.default_rng(seed))
    t = default_t_grid()
    assert not psd_test(char_function(tr, t), t).negative


@SLOW
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=21, max_size=21))
def test_hankel_positivity_and_moment_bound(weights):
    xi = np.linspace(-1, 1, 21)
    h = np.asarray(weights) + 1e-3
    mu = moments_of_profile(SpectralProfile.uniform(xi, h), 5)
    assert np.all(mu.values <= 1 + 1e-12)
    assert np.all(mu.hankel_min_eigs() >= -1e-10)
    assert isinstance(mu, MomentSequence)


@given(st.floats(min_value=0.05, max_value=0.9), st.floats(min_value=0.0, max_value=1.0))
def test_window_scaling(width, pos):
    center = 0.5 * width + pos * (1 - width)
    w = make_window(1.0, min(max(center, width / 2), 1 - width / 2), width)
    half = make_window(1.0, w.center, width / 2)
    assert abs(half.norm_sq / w.norm_sq - 0.5) < 1e-10


@given(st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False), min_size=2, max_size=60),
       st.floats(min_value=0.1, max_value=10))
def test_sign_changes_invariant_under_scaling_and_negation(vals, c):
    v = np.asarray(vals)
    if np.abs(v).max() == 0:
        return
    n = count_sign_changes_on_segment(v, closed=True)
    assert n == count_sign_changes_on_segment(c * v, closed=True)
    assert n == count_sign_changes_on_segment(-v, closed=True)
    assert n % 2 == 0


@SLOW
@given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 10**4))
def test_domain_count_invariant_under_torus_shift(s0, s1, seed):
    rng = np.random.default_rng(seed)
    g = sign_grid(rng.standard_normal((16, 16)))
    shifted = sign_grid(np.roll(g.signs, (s0, s1), axis=(0, 1)).astype(float))
    assert domain_count(g, TORUS) == domain_count(shifted, TORUS)


@SLOW
@given(st.sampled_from([25, 65, 85, 130]), st.integers(0, 10**6))
def test_euler_inequality_on_even_ensembles(n, seed):
    u = ensemble_eigenfunction(EnsembleSpec("torus", n, Parity.EVEN, seed))
    g = build_nodal_graph(u, resolution=1024)
    assert g.euler_ok()
    assert g.nodal_domains >= np.ceil(g.fix_crossings / 2) + 1 - g.genus


@SLOW
@given(st.integers(0, 10**6), st.floats(-2, 2), st.floats(-2, 2))
def test_quantization_is_linear(seed, alpha, beta):
    u = FourierSum.from_eigenfunction(ensemble_eigenfunction(EnsembleSpec("torus", 25, Parity.NONE, seed)))
    a, b = xi1_squared(), modulated_kinetic_symbol()
    combo = TorusSymbol(lambda x, y, p, q: alpha * a(x, y, p, q) + beta * b(x, y, p, q), order=2.0)
    lhs = quantize_apply(combo, u, resolution=32)
    rhs = alpha * quantize_apply(a, u, resolution=32) + beta * quantize_apply(b, u, resolution=32)
    assert np.abs(lhs - rhs).max() < 1e-12


@SLOW
@given(st.integers(0, 10**6))
def test_real_even_symbol_gives_real_pairing(seed):
    u = FourierSum.from_eigenfunction(ensemble_eigenfunction(EnsembleSpec("torus", 65, Parity.EVEN, seed)))
    assert abs(pairing(modulated_kinetic_symbol(), u).imag) < 1e-10


@SLOW
@given(st.integers(0, 10**6), st.sampled_from([Parity.EVEN, Parity.ODD]))
def test_ensembles_have_exact_parity(seed, parity):
    u = ensemble_eigenfunction(EnsembleSpec("torus", 85, parity, seed))
    a, b = TORUS.sample_grid(32)
    ta, tb = TORUS.involution(a, b)
    sign = 1 if parity is Parity.EVEN else -1
    assert np.abs(u(ta, tb) - sign * u(a, b)).max() < 1e-12
