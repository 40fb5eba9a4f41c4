import numpy as np
import pytest

from qnodal.bochner import (SpectralProfile, bump_mixture_trace, carleman_report, char_function, default_t_grid,
                            detect_sign_change, fourier_profile, mixture_trace, moments_of_profile, psd_test,
                            reference_char)
from qnodal.errors import DegenerateTraceError, GridError, OrderError
from qnodal.geometry import make_surface
from qnodal.restriction import even_trace, make_window, trace_from_samples
from qnodal.spectra import EnsembleSpec, Parity, ensemble_eigenfunction
from qnodal.specfun import ReferenceLaw, j0

FIX = make_surface("torus").fixed_locus[0]
S = (np.arange(8192) + 0.5) / 8192
W = make_window(1.0, 0.5, 0.8)


def ensemble_trace(seed=0, n=325):
    u = ensemble_eigenfunction(EnsembleSpec("torus", n, Parity.EVEN, seed))
    return even_trace(u, FIX, make_window(FIX, 0.5, 0.8))


def test_arcsine_and_semicircle_profiles():
    arc = SpectralProfile.from_density(lambda x: 1 / (np.pi * np.sqrt(1 - x * x)))
    mu = moments_of_profile(arc, 2, normalize=False).values
    assert mu[1] == pytest.approx(0.5, abs=1e-6) and mu[2] == pytest.approx(0.375, abs=1e-6)
    semi = SpectralProfile.from_density(lambda x: 2 / np.pi * np.sqrt(1 - x * x))
    mu = moments_of_profile(semi, 2, normalize=False).values
    assert mu[1] == pytest.approx(0.25, abs=1e-6) and mu[2] == pytest.approx(0.125, abs=1e-6)


def test_peaks_at_plus_minus_one():
    xi = np.linspace(-3, 3, 6001)
    h = np.exp(-((np.abs(xi) - 1) ** 2) / 2e-10)
    mu = moments_of_profile(SpectralProfile.uniform(xi, h), 4).values
    assert np.allclose(mu, 1.0, atol=1e-5)
    with pytest.raises(OrderError):
        moments_of_profile(SpectralProfile.uniform(xi, h), 13)


def test_profile_plancherel_and_evenness():
    p = fourier_profile(ensemble_trace(), xi_max=None)
    assert p.mass == pytest.approx(1.0, abs=1e-6)
    p3 = fourier_profile(ensemble_trace())
    assert np.allclose(p3.h, p3.h[::-1], atol=1e-12)
    assert moments_of_profile(p3, 1).values[1] == pytest.approx(0.5, rel=0.15)


def test_profile_localization():
    lam = 2 * np.pi * 30
    osc = fourier_profile(trace_from_samples(W(S) * np.sin(lam * S), 1.0, lam))
    flat = fourier_profile(trace_from_samples(W(S), 1.0, lam))
    assert abs(osc.xi[np.argmax(osc.h)]) == pytest.approx(1.0, abs=0.02)
    assert abs(flat.xi[np.argmax(flat.h)]) < 0.02
    with pytest.raises(DegenerateTraceError):
        fourier_profile(trace_from_samples(np.zeros(8192), 1.0, lam))


def test_carleman():
    from qnodal.bochner import MomentSequence
    from qnodal.specfun import arcsine_moment
    rep = carleman_report(MomentSequence(np.array([arcsine_moment(k) for k in range(7)])))
    assert rep.r[0] == pytest.approx(np.sqrt(0.5) / 2) and rep.argmax == 1
    ones = carleman_report(MomentSequence(np.ones(7)))
    assert np.allclose(ones.r, 1 / (2 * np.arange(1, 7))) and ones.max == 0.5
    gauss = np.array([np.prod(np.arange(1, 2 * k, 2)) for k in range(7)], dtype=float)
    g = carleman_report(MomentSequence(gauss))
    assert np.all(np.diff(g.r) < 0) and np.isfinite(g.max)


def test_char_function_properties():
    tr = ensemble_trace(3)
    t = default_t_grid()
    phi = char_function(tr, t)
    assert phi[0] == pytest.approx(1.0) and np.abs(phi).max() <= 1 + 1e-12
    assert np.allclose(char_function(tr, -t), phi)


def test_char_function_matches_lag_integral():
    lam = 2 * np.pi * 20
    psi = W(S) * np.sin(lam * S)
    tr = trace_from_samples(psi, 1.0, lam)
    h = 1.0 / S.size
    for t in (0.7, np.pi, 5.0):
        k = t / lam / h
        shifted = np.interp(S + t / lam, S, psi, right=0.0)
        direct = h * np.dot(psi, shifted) / tr.norm_sq
        assert char_function(tr, [t])[0] == pytest.approx(direct, abs=1e-4), k


def test_moment_derivatives_of_char():
    tr = ensemble_trace(1)
    mu = moments_of_profile(fourier_profile(tr, xi_max=None), 2).values
    h = 1e-2
    phi = char_function(tr, [0.0, h, 2 * h])
    d2 = 2 * (phi[1] - phi[0]) / h**2
    d4 = (2 * phi[2] - 8 * phi[1] + 6 * phi[0]) / h**4
    assert d2 == pytest.approx(-mu[1], abs=1e-4)
    assert d4 == pytest.approx(mu[2], rel=1e-2)


def test_psd_examples():
    t = np.linspace(0, 2 * np.pi, 257)
    v = psd_test(np.cos(t), t)
    assert v.negative and v.t_star == pytest.approx(np.pi) and v.value == pytest.approx(-1.0)
    t = default_t_grid()
    assert not psd_test(np.exp(-t * t / 2), t).negative
    v = psd_test(np.array([j0(x) for x in t]), t)
    # J0 attains its minimum at the first zero of J1, past pi
    assert v.negative and v.t_star == pytest.approx(3.83, abs=0.03)
    assert v.value == pytest.approx(-0.4028, abs=1e-3)
    with pytest.raises(GridError):
        psd_test(np.ones(3), [0.0, 1.0, 3.0])
    with pytest.raises(GridError):
        psd_test(np.ones(3), [1.0, 2.0, 3.0])


def test_reference_char():
    assert reference_char(ReferenceLaw.mixture(1.0), np.pi) == pytest.approx(-0.3042, abs=5e-5)
    assert reference_char(ReferenceLaw.semicircle(), 5.0) == pytest.approx(-0.13103, abs=1e-4)
    assert reference_char(ReferenceLaw.mixture(0.0), np.pi) == pytest.approx(-1.0)


def test_detector_on_simple_traces():
    lam = 2 * np.pi * np.sqrt(13)
    assert detect_sign_change(trace_from_samples(W(S), 1.0, lam)).verdict == "NoEvidence"
    r = detect_sign_change(trace_from_samples(W(S) * np.cos(4 * np.pi * S), 1.0, lam))
    assert r.verdict == "SignChange" and r.phi_min < -0.1 and r.scan_agrees


def test_detector_on_ensemble():
    r = detect_sign_change(ensemble_trace(0))
    assert r.sign_change and r.scan_changes > 0
    assert 0.0 <= r.fitted_a <= 1.0
    assert '"verdict": "SignChange"' in r.to_json()


def test_bump_mixtures_are_never_flagged():
    rng = np.random.default_rng(7)
    for _ in range(20):
        assert not detect_sign_change(bump_mixture_trace(rng)).sign_change


@pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
def test_mixture_surrogates_converge(a):
    t = np.linspace(0, 2 * np.pi, 129)
    target = reference_char(ReferenceLaw.mixture(a), t)
    errs = []
    for k, terms in ((10, 3), (40, 4), (160, 6), (640, 9)):
        e = [np.abs(char_function(mixture_trace(a, 2 * np.pi * k, terms, seed=s), t) - target).max()
             for s in range(8)]
        errs.append(np.mean(e))
    assert all(x > y for x, y in zip(errs, errs[1:]))
    assert errs[-1] < 1e-2
