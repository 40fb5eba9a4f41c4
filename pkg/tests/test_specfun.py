import numpy as np
import pytest

from qnodal.errors import ModeError, OrderError, QuadratureError, RangeError
from qnodal.specfun import (QuadratureRule, ReferenceLaw, arcsine_moment, bessel_j, integrate, j0, j1,
                            quadrature_moment, reference_moment, semicircle_char, semicircle_moment)

# 20-digit values from an arbitrary-precision Bessel evaluation
BESSEL_TABLE = [
    (0.5, 0.93846980724081290423, 0.24226845767487388638),
    (np.pi, -0.30424217764409382935, 0.2846153431797528057),
    (5.0, -0.17759677131433830435, -0.32757913759146522204),
    (10.0, -0.2459357644513483352, 0.04347274616886143667),
    (12.0, 0.047689310796833536624, -0.22344710449062761237),
    (12.5, 0.14688405470042110231, -0.16548380461475971846),
    (30.0, -0.086367983581040211336, -0.11875106261662293652),
    (100.0, 0.019985850304223122424, -0.077145352014112158033),
    (1000.0, 0.024786686152420174561, 0.0047283119070895239176),
]


@pytest.mark.parametrize("t,v0,v1", BESSEL_TABLE)
def test_bessel_against_table(t, v0, v1):
    assert j0(t) == pytest.approx(v0, abs=2e-12)
    assert j1(t) == pytest.approx(v1, abs=2e-12)


def test_bessel_printed_digits():
    assert f"{j0(np.pi):.4f}" == "-0.3042"
    assert f"{j1(5.0) / 5.0:.4f}" == "-0.0655"


def test_bessel_parity_and_origin():
    t = np.linspace(0.1, 40, 50)
    assert np.allclose(bessel_j(0, -t), bessel_j(0, t))
    assert np.allclose(bessel_j(1, -t), -bessel_j(1, t))
    assert j0(0.0) == 1.0 and j1(0.0) == 0.0


def test_bessel_rejects_bad_input():
    with pytest.raises(ModeError):
        bessel_j(2, 1.0)
    with pytest.raises(RangeError):
        j0(1e7)


def test_first_zero_of_j1_is_the_argmin_of_j0():
    # J0' = -J1, so the minimum of J0 sits at the first zero of J1
    assert abs(j1(3.8317059702075123156)) < 1e-14


@pytest.mark.parametrize("m,expected", [(0, 1.0), (1, 0.5), (2, 0.375), (3, 0.3125), (12, 676039 / 4194304)])
def test_arcsine_moments(m, expected):
    assert arcsine_moment(m) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("m,expected", [(0, 1.0), (1, 0.25), (2, 0.125), (3, 5 / 64)])
def test_semicircle_moments(m, expected):
    assert semicircle_moment(m) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("m", range(13))
def test_quadrature_matches_closed_form(m):
    for law in (ReferenceLaw.arcsine(), ReferenceLaw.semicircle(), ReferenceLaw.mixture(0.3)):
        assert abs(quadrature_moment(law, m) - reference_moment(law, m)) <= 1e-12


def test_mixture_endpoints():
    assert reference_moment(ReferenceLaw.mixture(0.0), 4) == 1.0
    assert reference_moment(ReferenceLaw.point_pair(), 7) == 1.0
    assert reference_moment(ReferenceLaw.mixture(1.0), 4) == arcsine_moment(4)
    with pytest.raises(ModeError):
        ReferenceLaw.mixture(1.5)
    with pytest.raises(OrderError):
        reference_moment(ReferenceLaw.arcsine(), 65)


def test_integrate_reports_bad_node():
    rule = QuadratureRule.trapezoid(0.0, 1.0, 5)
    with pytest.raises(QuadratureError) as err, np.errstate(divide="ignore"):
        integrate(rule, lambda x: 1.0 / (x - 0.5))
    assert err.value.index == 2


def test_trapezoid_periodic_is_exact_for_trig():
    rule = QuadratureRule.trapezoid(0.0, 2 * np.pi, 16, periodic=True)
    assert integrate(rule, lambda x: np.cos(3 * x) ** 2) == pytest.approx(np.pi, abs=1e-14)


def test_semicircle_char():
    assert semicircle_char(0.0) == 1.0
    assert semicircle_char(2.0) == pytest.approx(0.5767248077568733872, abs=1e-14)
