"""The twelve acceptance criteria at their stated tolerances and time budgets."""
import time

import numpy as np
import pytest

from qnodal import experiments as ex
from qnodal.config import ExperimentConfig
from qnodal.geometry import make_surface
from qnodal.restriction import make_window, odd_normal_moment
from qnodal.specfun import semicircle_moment
from qnodal.spectra import EnsembleSpec, Parity, ensemble_eigenfunction

CFG = ExperimentConfig()


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def reference():
    return timed(ex.reference_criteria)


@pytest.fixture(scope="module")
def rellich():
    return timed(ex.rellich_experiment, CFG)


def criterion(outcome, ident):
    return next(c for c in outcome.criteria if c.ident == ident)


def check(record, outcome, ident, elapsed, budget, note=""):
    c = criterion(outcome, ident)
    ok = c.passed and elapsed < budget
    record(ident, c.name, ok, f"{note} [{elapsed:.1f}s < {budget:g}s]".strip())
    assert c.passed, c.detail
    assert elapsed < budget


def test_c01_bessel_certificates(reference, record_criterion):
    out, dt = reference
    d = criterion(out, 1).detail
    check(record_criterion, out, 1, dt, 1.0, f"J0(pi)={d['J0(pi)']:.4f} J1(5)/5={d['J1(5)/5']:.4f}")


def test_c02_reference_moments(reference, record_criterion):
    out, dt = reference
    check(record_criterion, out, 2, dt, 1.0, f"max err {criterion(out, 2).detail['max_abs_err']:.1e}")


def test_c03_mixture_negativity(reference, record_criterion):
    out, dt = reference
    check(record_criterion, out, 3, dt, 1.0)


def test_c04_nodal_oracle(record_criterion):
    out, dt = timed(ex.nodal_oracle, CFG)
    check(record_criterion, out, 4, dt, 120.0, f"{criterion(out, 4).detail['cases']} modes")
    assert len(out.tables["nodal.csv"][1]) == 25


def test_c05_euler_inequality(record_criterion):
    out, dt = timed(ex.euler_experiment, CFG)
    d = criterion(out, 5).detail
    check(record_criterion, out, 5, dt, 300.0, f"{d['graphs']} graphs, {d['violations']} violations")


def test_c06_rellich_gap(rellich, record_criterion):
    out, dt = rellich
    d = criterion(out, 6).detail
    note = "rel err " + " ".join(f"{x:+.3f}" for x in d["rel_err"])
    note += ", control " + " ".join(f"{x:+.2f}" for x in d["control_rel_err"])
    check(record_criterion, out, 6, dt, 120.0, note)


def test_c07_l2_lower_bound(rellich, record_criterion):
    out, dt = rellich
    check(record_criterion, out, 7, dt, 60.0, f"ratio {criterion(out, 7).detail['mean_ratio']:.4f}")


def test_c08_odd_moments(record_criterion):
    out, dt = timed(ex.odd_experiment, CFG)
    d = criterion(out, 8).detail
    check(record_criterion, out, 8, dt, 120.0,
          f"n={CFG.odd_selector} rel err " + " ".join(f"{x:+.3f}" for x in d["rel_err"]))


def test_c09_detector(record_criterion):
    out, dt = timed(ex.detector_experiment, CFG)
    d = criterion(out, 9).detail
    check(record_criterion, out, 9, dt, 120.0,
          f"{d['false_positives']}/{CFG.bump_traces} false, {d['hits']}/{d['of']} hits")


def test_c10_growth_trend(record_criterion):
    out, dt = timed(ex.growth_experiment, CFG)
    check(record_criterion, out, 10, dt, 300.0, f"medians {criterion(out, 10).detail['medians']}")


def test_c11_psido(record_criterion):
    out, dt = timed(ex.psido_experiment, CFG)
    d = criterion(out, 11).detail
    check(record_criterion, out, 11, dt, 120.0,
          f"d<={d['exact_d_max']:.1e}, exponent {d['exponent']:.3f}, D={d['directions']}")


def test_c12_pairing_growth(record_criterion):
    out, dt = timed(ex.pairing_experiment, CFG)
    slopes = criterion(out, 12).detail["slopes"]
    check(record_criterion, out, 12, dt, 120.0, "slopes " + " ".join(f"{v:.2f}" for v in slopes.values()))


@pytest.mark.xfail(strict=True, reason="first-moment anisotropy of the 24 lattice directions at n=325")
def test_odd_first_moment_at_325_is_within_tolerance():
    torus = make_surface("torus")
    vals = []
    for seed in range(20):
        u = ensemble_eigenfunction(EnsembleSpec("torus", 325, Parity.ODD, seed))
        for seg in torus.fixed_locus:
            w = make_window(seg, 0.5, 0.8)
            vals.append(odd_normal_moment(u, seg, w, 1) / w.norm_sq)
    assert abs(np.mean(vals) / semicircle_moment(1) - 1) <= 0.15
