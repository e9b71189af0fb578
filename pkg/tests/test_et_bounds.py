import math

import numpy as np
import pytest

from cmsdisc.chebyshev_core import ChebKind, cheb_zeros
from cmsdisc.config import default_grid, load_defaults
from cmsdisc.errors import IndexOutOfRange, InsufficientMoments, KindMismatch
from cmsdisc.et_bounds import (
    adjacent_order,
    calibrate_K,
    cms_bound_at,
    cms_bound_profile,
    et_bound_profile,
    et_circle,
    et_interval_t,
    et_interval_u,
    max_exact_n0,
    rho,
)
from cmsdisc.measures import (
    DiscreteMeasure,
    Domain,
    MomentKind,
    MomentSequence,
    arc_discrepancy,
    chebyshev_zero_measure,
    circle_corpus,
    fourier,
    gauss_measure,
    moments,
    roots_of_unity,
    true_discrepancy,
    two_sided_discrepancy,
)

CALIBRATED = load_defaults()["calibrated"]
DELTA = DiscreteMeasure.point_mass(0.0)


def test_rho():
    assert rho(0.5, 4) == 0.5
    assert rho(1.0, 4) == pytest.approx(1.0 / 16)
    assert rho(-3.0, 2) == pytest.approx(0.25)
    assert rho(np.array([0.0, 1.0]), 1).tolist() == [1.0, 1.0]
    with pytest.raises(IndexOutOfRange):
        rho(0.0, 0)


def test_circle_bound_examples():
    assert et_circle(MomentSequence.zeros(MomentKind.FOURIER, 4), 4, 1.0).bound_value == 0.25
    report = et_circle(fourier(roots_of_unity(5), 5), 5, 1.0)
    assert report.bound_value == pytest.approx(0.4)
    assert report.x0 is None


def test_first_kind_bound_example():
    eps = moments(DELTA, ChebKind.FIRST, 4)
    assert et_interval_t(eps, 4, 1.0).bound_value == pytest.approx(1.0)
    assert et_interval_t(eps, 4, 2.0).bound_value == pytest.approx(2.0)
    assert et_interval_t(eps, 4).k_used == load_defaults()["constants"]["k2"]


def test_second_kind_bound_examples():
    eps = moments(DELTA, ChebKind.SECOND, 4)
    assert et_interval_u(eps, 4, 0.0, 1.0).bound_value == pytest.approx(1.0)
    assert et_interval_u(eps, 4, 1.0, 1.0).bound_value == pytest.approx(1.0 / 64 + 0.1875)


def test_bound_errors():
    t = moments(DELTA, ChebKind.FIRST, 4)
    with pytest.raises(KindMismatch):
        et_interval_u(t, 4, 0.0)
    with pytest.raises(InsufficientMoments):
        et_interval_t(t, 5)
    with pytest.raises(IndexOutOfRange):
        et_interval_t(t, 0)
    with pytest.raises(ValueError):
        et_interval_t(t, 2, k=0.0)


def test_report_is_homogeneous_in_k(corpus):
    eps = moments(corpus[5], ChebKind.SECOND, 8)
    one = et_interval_u(eps, 8, 0.3, 1.0)
    three = et_interval_u(eps, 8, 0.3, 3.0)
    assert three.bound_value == pytest.approx(3.0 * one.bound_value)
    assert one.bound_value == pytest.approx(one.k_used * (one.leading + math.fsum(one.terms)))
    assert len(one.terms) == 8


def test_second_kind_profile_shrinks_at_the_edges(corpus):
    grid = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    for mu in corpus[:10]:
        profile = et_bound_profile(mu, ChebKind.SECOND, 6, grid, 1.0)
        assert profile[0] < profile[2] and profile[-1] < profile[2]
        assert profile[2] == pytest.approx(et_interval_u(moments(mu, "u", 6), 6, 0.0, 1.0).bound_value)


def test_first_kind_profile_is_flat(corpus):
    profile = et_bound_profile(corpus[0], ChebKind.FIRST, 4, default_grid(), 1.0)
    assert np.all(profile == profile[0])


def test_adjacent_order():
    assert [adjacent_order(n0) for n0 in (1, 2, 3, 4, 64)] == [2, 2, 3, 3, 33]


@pytest.mark.parametrize("kind,expected", [(ChebKind.FIRST, 1.0 / 3), (ChebKind.SECOND, 0.5)])
def test_cms_bound_at_a_zero_is_the_gauss_weight(kind, expected):
    eps = MomentSequence.zeros(MomentKind.for_cheb(kind), 4)
    report = cms_bound_at(eps, kind, 0.0, 4)
    assert report.bound_value == pytest.approx(expected, abs=1e-12)
    assert report.k_used == 1.0


def test_cms_bound_accepts_measure_or_moments(corpus):
    mu = corpus[11]
    eps = moments(mu, ChebKind.SECOND, 2 * adjacent_order(8) - 2)
    for x0 in (-0.7, 0.1, 0.95):
        assert cms_bound_at(mu, "u", x0, 8) == cms_bound_at(eps, "u", x0, 8)


def test_cms_bound_dominates_gauss_measure():
    mu = gauss_measure(ChebKind.FIRST, 64)
    grid = np.concatenate([default_grid(), mu.positions])
    bounds = cms_bound_profile(mu, ChebKind.FIRST, grid, 8)
    truth = two_sided_discrepancy(mu, ChebKind.FIRST, grid)
    assert np.all(truth <= bounds + 1e-12)


def test_cms_bound_far_from_support():
    far = DiscreteMeasure.point_mass(10.0)
    assert cms_bound_at(far, ChebKind.FIRST, 10.0, 4).bound_value >= 1.0
    left = cms_bound_at(DELTA, ChebKind.SECOND, -10.0, 4)
    assert left.bound_value >= 0.0
    assert cms_bound_at(DELTA, ChebKind.SECOND, 10.0, 4).bound_value >= 0.0


def test_cms_bound_sides_use_adjacent_zeros():
    zeros = cheb_zeros(ChebKind.FIRST, adjacent_order(6))
    eps = MomentSequence.zeros(MomentKind.T, 6)
    mid = 0.5 * (zeros[1] + zeros[2])
    bound = cms_bound_at(eps, ChebKind.FIRST, mid, 6).bound_value
    assert bound >= cms_bound_at(eps, ChebKind.FIRST, zeros[1], 6).bound_value
    assert bound <= 1.0


@pytest.mark.slow
@pytest.mark.parametrize("n0", [2, 4, 8, 16, 32, 64])
def test_bounds_hold_on_corpus(n0, corpus):
    grid = default_grid()
    for mu in corpus:
        points = np.concatenate([mu.positions, grid])
        truth1 = two_sided_discrepancy(mu, ChebKind.FIRST, points)
        truth2 = two_sided_discrepancy(mu, ChebKind.SECOND, points)
        assert np.all(truth1 <= cms_bound_profile(mu, ChebKind.FIRST, points, n0) + 1e-9), mu.label
        assert np.all(truth2 <= cms_bound_profile(mu, ChebKind.SECOND, points, n0) + 1e-9), mu.label
        worst = true_discrepancy(mu, ChebKind.FIRST).value
        assert worst <= et_interval_t(moments(mu, "t", n0), n0, CALIBRATED["k2"]).bound_value
        profile = et_bound_profile(mu, ChebKind.SECOND, n0, points, CALIBRATED["k3"])
        assert np.all(truth2 <= profile), mu.label


@pytest.mark.slow
@pytest.mark.parametrize("n0", [1, 2, 4, 8, 16, 32, 64])
def test_circle_bound_holds_on_circle_corpus(n0):
    for nu in circle_corpus(0):
        bound = et_circle(fourier(nu, n0), n0, CALIBRATED["k1"]).bound_value
        assert arc_discrepancy(nu).value <= bound, nu.label


def test_calibrate_single_point_mass():
    cal = calibrate_K([DELTA], [1])
    assert cal.k1 == 0.0
    assert cal.k2 == pytest.approx(0.5)
    assert cal.k3 == pytest.approx(0.5)
    assert set(cal.witnesses) == {"k2", "k3"}
    assert cal.witnesses["k2"].x0 == 0.0


def test_calibrate_uses_circle_measures():
    cal = calibrate_K([roots_of_unity(4)], [1, 2])
    assert cal.k1 > 0.0
    assert cal.k2 == cal.k3 == 0.0
    assert cal.as_dict()["witnesses"]["k1"]["label"] == "roots-of-unity-4"


def test_calibration_grows_with_the_corpus(corpus):
    small = calibrate_K(corpus[:10], [2, 4])
    large = calibrate_K(corpus[:30], [2, 4])
    assert large.k2 >= small.k2
    assert large.k3 >= small.k3


def test_calibrate_rejects_empty_corpus():
    with pytest.raises(ValueError):
        calibrate_K([], [2])


@pytest.mark.parametrize("x,n0,expected", [(0.0, 10, 1.0), (1.0, 10, 0.01), (0.5, 1, 1.0)])
def test_rho_examples(x, n0, expected):
    assert rho(x, n0) == pytest.approx(expected)


def test_circle_bound_reference_values():
    assert et_circle(MomentSequence.zeros(MomentKind.FOURIER, 10), 10, 1.0).bound_value == pytest.approx(0.1)
    point = fourier(DiscreteMeasure.point_mass(0.0, Domain.CIRCLE), 4)
    assert et_circle(point, 4, 1.0).bound_value == pytest.approx(0.25 + 25.0 / 12.0)
    for k in (3, 6, 11):
        assert et_circle(fourier(roots_of_unity(k), k - 1), k - 1, 1.0).bound_value == pytest.approx(
            1.0 / (k - 1)
        )


def test_first_kind_reference_values():
    assert et_interval_t(MomentSequence.zeros(MomentKind.T, 20), 20, 1.0).bound_value == pytest.approx(0.05)
    for m in (3, 8):
        eps = moments(chebyshev_zero_measure(m), ChebKind.FIRST, m - 1)
        assert et_interval_t(eps, m - 1, 1.0).bound_value == pytest.approx(1.0 / (m - 1))
    assert et_interval_t(moments(DELTA, "t", 2), 2, 1.0).bound_value == pytest.approx(1.0)


def test_second_kind_reference_values():
    zero = MomentSequence.zeros(MomentKind.U, 10)
    assert et_interval_u(zero, 10, 1.0, 1.0).bound_value == pytest.approx(0.001)
    assert et_interval_u(zero, 10, 0.0, 1.0).bound_value == pytest.approx(0.1)


def test_cms_bound_right_of_support_is_finite(interval_measures):
    for mu in interval_measures[:10]:
        report = cms_bound_at(mu, ChebKind.SECOND, 10.0, 6)
        assert math.isfinite(report.bound_value) and report.bound_value >= 0.0


def test_calibrate_point_mass_against_two_moments():
    assert calibrate_K([DELTA], [2]).k2 == pytest.approx(0.5)


def test_exact_bound_order_limit():
    assert max_exact_n0() == 126
    assert adjacent_order(126) == 64
    with pytest.raises(IndexOutOfRange, match="n0 must lie in 1..126 for the exact bound, got 127"):
        cms_bound_at(DELTA, ChebKind.FIRST, 0.3, 127)
