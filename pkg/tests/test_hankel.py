import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf

from chlab.corpus import random_spectral_data
from chlab.hankel import (HankelIndex, SpectralData, SpectralDataError,
                          hankel_det, hankel_det_naive, hankel_det_time_deriv,
                          hankel_matrix, identity_suite, moment)
from chlab.precision import working_precision

# lambda = (2, 1), E = (1, 1): the two-component fixture with closed-form moments
FIXTURE = SpectralData((mpf(2), mpf(1)), (mpf(0), mpf(0)))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def test_rates_must_be_positive():
    with pytest.raises(SpectralDataError):
        SpectralData((mpf(-1),), (mpf(0),))


def test_rates_must_be_distinct():
    with pytest.raises(SpectralDataError):
        SpectralData((mpf(1), mpf(1)), (mpf(0), mpf(0)))


def test_lengths_must_match():
    with pytest.raises(SpectralDataError):
        SpectralData((mpf(1),), (mpf(0), mpf(0)))


def test_empty_rejected():
    with pytest.raises(SpectralDataError):
        SpectralData((), ())


# ---------------------------------------------------------------------------
# moments and determinants: hand values
# ---------------------------------------------------------------------------

def test_moments_closed_form():
    # A_m = 2^m + 1
    for m in range(-3, 5):
        assert moment(FIXTURE, m) == mpf(2) ** m + 1


def test_hankel_matrix_entries():
    mat = hankel_matrix(FIXTURE, 2, 0)
    assert mat == [[mpf(2), mpf(3)], [mpf(3), mpf(5)]]


def test_hankel_det_hand_values():
    # D(2,m) = (2-1)^2 * 2^m, D(1,m) = 2^m + 1
    assert hankel_det(FIXTURE, HankelIndex(2, 0)) == 1
    assert hankel_det(FIXTURE, HankelIndex(2, 1)) == 2
    assert hankel_det(FIXTURE, HankelIndex(1, 1)) == 3
    assert hankel_det(FIXTURE, HankelIndex(1, 2)) == 5


def test_hankel_det_conventions():
    assert hankel_det(FIXTURE, HankelIndex(0, 7)) == 1
    assert hankel_det(FIXTURE, HankelIndex(-1, 0)) == 0
    assert hankel_det(FIXTURE, HankelIndex(3, 0)) == 0  # order above rank


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**9), st.integers(-2, 3))
def test_two_route_agreement(seed, m):
    data = random_spectral_data(random.Random(seed), max_n=5)
    for n in range(1, data.n + 1):
        a = hankel_det(data, HankelIndex(n, m))
        b = hankel_det_naive(data, HankelIndex(n, m))
        assert abs(a - b) / max(abs(a), abs(b)) < mpf("1e-40")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**9), st.integers(-2, 3))
def test_positivity(seed, m):
    data = random_spectral_data(random.Random(seed), max_n=6)
    for n in range(1, data.n + 1):
        assert hankel_det(data, HankelIndex(n, m)) > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9), st.integers(-1, 2), st.integers(1, 3))
def test_weight_scaling_covariance(seed, m, num):
    # scaling every weight by s multiplies D(n, m) by s^n
    data = random_spectral_data(random.Random(seed), max_n=4)
    s = mpf(num) / 2
    scaled = SpectralData(data.lam, tuple(le + mpmath.log(s) for le in data.log_e))
    for n in range(1, data.n + 1):
        a = hankel_det(data, HankelIndex(n, m)) * s ** n
        b = hankel_det(scaled, HankelIndex(n, m))
        assert abs(a - b) / abs(b) < mpf("1e-60")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9), st.integers(-1, 2))
def test_rate_scaling_covariance(seed, m):
    # scaling every rate by s multiplies D(n, m) by s^{n(n-1) + n m}
    data = random_spectral_data(random.Random(seed), max_n=4)
    s = mpf(3) / 2
    scaled = SpectralData(tuple(s * l for l in data.lam), data.log_e)
    for n in range(1, data.n + 1):
        a = hankel_det(data, HankelIndex(n, m)) * s ** (n * (n - 1) + n * m)
        b = hankel_det(scaled, HankelIndex(n, m))
        assert abs(a - b) / abs(b) < mpf("1e-60")


def test_rank_collapse_exact_zero_by_expansion():
    data = random_spectral_data(random.Random(7), max_n=4)
    for m in range(-2, 4):
        assert hankel_det(data, HankelIndex(data.n + 1, m)) == 0


def test_rank_collapse_naive_route_small():
    data = random_spectral_data(random.Random(7), max_n=4)
    n = data.n + 1
    for m in range(-1, 3):
        mat = hankel_matrix(data, n, m)
        # Hadamard bound as the cancellation scale
        scale = mpf(1)
        for row in mat:
            scale *= mpmath.sqrt(sum(x * x for x in row))
        assert abs(hankel_det_naive(data, HankelIndex(n, m))) <= mpf("1e-30") * scale


# ---------------------------------------------------------------------------
# time derivative
# ---------------------------------------------------------------------------

def test_advanced_moment_derivative_rule():
    # d/dt A_m = 2 A_{m-1}: check via the advanced weights
    dt = mpf("1e-30")
    with working_precision(512):
        for m in range(-1, 3):
            fwd = moment(FIXTURE.advanced(dt), m)
            bwd = moment(FIXTURE.advanced(-dt), m)
            deriv = (fwd - bwd) / (2 * dt)
            want = 2 * moment(FIXTURE, m - 1)
            assert abs(deriv - want) / abs(want) < mpf("1e-50")


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**9), st.integers(-1, 2))
def test_det_time_derivative_matches_difference(seed, m):
    data = random_spectral_data(random.Random(seed), max_n=4)
    dt = mpf("1e-30")
    with working_precision(512):
        for n in range(1, data.n + 1):
            idx = HankelIndex(n, m)
            fwd = hankel_det(data.advanced(dt), idx)
            bwd = hankel_det(data.advanced(-dt), idx)
            deriv = (fwd - bwd) / (2 * dt)
            want = hankel_det_time_deriv(data, idx)
            assert abs(deriv - want) / abs(want) < mpf("1e-50")


def test_time_derivative_conventions():
    assert hankel_det_time_deriv(FIXTURE, HankelIndex(0, 1)) == 0
    assert hankel_det_time_deriv(FIXTURE, HankelIndex(3, 1)) == 0


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

def test_identity_suite_fixture_passes():
    rep = identity_suite(FIXTURE)
    assert rep.ok
    assert rep.max_residual <= mpf("1e-40")
    # every family must actually have been exercised
    assert set(rep.residuals) == {
        "hankel_recursion", "bilinear_t_22", "bilinear_t_00",
        "bilinear_t_minor_20", "bilinear_t_minor_02",
        "telescope_sum_3", "telescope_sum_neg1", "jacobi_identity",
    }


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**9))
def test_identity_suite_random(seed):
    data = random_spectral_data(random.Random(seed), max_n=5)
    rep = identity_suite(data)
    assert rep.ok, rep.violations


def test_identity_suite_unattainable_threshold_reports_violations():
    rep = identity_suite(FIXTURE, threshold=mpf("1e-100"))
    assert not rep.ok
