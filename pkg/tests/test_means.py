import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from areamean.means import (
    M_of_x,
    M_prime,
    MeanProfile,
    Params,
    area_mean,
    circle_mean,
    circle_mean_exact_p2,
    h_of_x,
    h_prime,
    h_second,
    means_point,
    phi,
    phi_minus_x,
    phi_prime,
    phi_second,
    profile_h,
    series_profile,
)
from areamean.quad import richardson_derivative
from areamean.series import PowerSeries
from areamean.sweep import corpus_generate

Z = PowerSeries.monomial(1)
ONE_PLUS_Z = PowerSeries((1, 1))
coeffs = st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False),
                  min_size=1, max_size=9)


def test_params_validation():
    assert Params(2, -2).is_theorem_range and not Params(2, -2.01).is_theorem_range
    with pytest.raises(ValueError):
        Params(0, -1)


def test_circle_mean_examples():
    assert circle_mean(PowerSeries.monomial(3), 1.7, 0.5) == pytest.approx(0.5 ** 5.1, rel=1e-14)
    assert circle_mean(PowerSeries((7,)), 0.8, 0.3) == pytest.approx(7 ** 0.8, rel=1e-15)
    assert circle_mean(ONE_PLUS_Z, 2, 0.5) == pytest.approx(1.25, rel=1e-15)
    assert circle_mean(ONE_PLUS_Z, 1.3, 0.0) == 1.0


def test_exact_p2_examples():
    assert circle_mean_exact_p2(Z, 0.25) == 0.25
    assert circle_mean_exact_p2(ONE_PLUS_Z, 0.25) == 1.25
    assert circle_mean_exact_p2(PowerSeries((0, 0, 2)), 0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("p", [0.5, 1.0, 3.5])
@pytest.mark.parametrize("r", [0.3, 0.9, 0.999])
def test_circle_mean_against_mpmath(p, r):
    f = corpus_generate()[7]
    ref = oracles.circle_mean_mp(f.coeffs, p, r)
    assert circle_mean(f, p, r) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("r", [0.5, 0.99, 0.9999999])
def test_circle_mean_with_zero_near_circle(r):
    # 1 + z has its zero at -1, approached as r -> 1
    ref = oracles.circle_mean_mp((1, 1), 0.5, r)
    assert circle_mean(ONE_PLUS_Z, 0.5, r) == pytest.approx(ref, rel=1e-12)


@given(coeffs, st.floats(0.0, 0.999))
def test_parseval_oracle(c, x):
    f = PowerSeries(tuple(c))
    v = oracles.parseval(c, x)
    assert abs(circle_mean(f, 2, math.sqrt(x)) - v) <= 1e-12 * (1 + v)


def test_m_prime_examples():
    x = np.array([0.1, 0.5, 0.9])
    assert np.allclose(M_of_x(Z, 2, x), x, rtol=1e-14)
    assert np.allclose(M_prime(Z, 2, x), 1.0, rtol=1e-13)
    assert M_prime(PowerSeries((3,)), 1.5, 0.4) == 0.0
    assert M_of_x(ONE_PLUS_Z, 2, 0.5) == pytest.approx(1.5, rel=1e-15)
    assert M_prime(ONE_PLUS_Z, 2, 0.5) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("p", [0.5, 1.0, 1.5, 3.5])
def test_m_prime_against_mpmath_difference(p):
    f = corpus_generate()[6]
    x = 0.6
    h = 1e-4
    # fourth-order central difference of the mpmath reference
    ref = [oracles.circle_mean_mp(f.coeffs, p, math.sqrt(x + k * h)) for k in (-2, -1, 1, 2)]
    d = (ref[0] - 8 * ref[1] + 8 * ref[2] - ref[3]) / (12 * h)
    assert M_prime(f, p, x) == pytest.approx(d, rel=1e-7)


def test_monomial_origin_power():
    prof = series_profile(PowerSeries.monomial(2), 0.5)
    assert prof.origin_power == 0.5 and prof.reduced is not None
    # M = x**0.5, h = integral of t**0.5 (1-t)**-1.5
    x = 0.3
    h, _ = profile_h(prof, -1.5, np.array([x]))
    assert h[0] == pytest.approx(float(oracles.mp.quad(lambda t: t ** 0.5 * (1 - t) ** -1.5, [0, x])),
                                 rel=1e-11)


def test_phi_examples():
    assert phi(0, 0.37) == pytest.approx(0.37, rel=1e-15)
    assert phi(-1, 0.5) == pytest.approx(math.log(2), rel=1e-15)
    assert phi(-2, 0.5) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        phi(-1, 1.0)


@given(st.floats(-3, 1), st.floats(0.0, 0.999))
def test_phi_against_quadrature(alpha, x):
    assert phi(alpha, x) == pytest.approx(oracles.phi_mp(alpha, x), rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("eps", [0.0, 1e-9, -1e-9, 2e-8])
def test_phi_continuous_across_minus_one(eps):
    x = 0.9
    assert phi(-1 + eps, x) == pytest.approx(oracles.phi_mp(-1 + eps, x), rel=1e-14)


@given(st.floats(-2, 0), st.floats(0.0, 0.999))
def test_phi_identity_and_lower_bound(alpha, x):
    assert abs(1 - (alpha + 1) * phi(alpha, x) - (1 - x) * phi_prime(alpha, x)) <= 1e-13
    assert phi_minus_x(alpha, x) >= 0


@given(st.floats(-2.5, 1), st.floats(1e-6, 0.9))
def test_phi_minus_x_series(alpha, x):
    assert phi_minus_x(alpha, x) == pytest.approx(oracles.phi_minus_x_mp(alpha, x), rel=1e-12, abs=1e-300)


def test_phi_derivatives():
    assert phi_prime(-1.5, 0.5) == pytest.approx(0.5 ** -1.5)
    assert phi_second(-1.5, 0.5) == pytest.approx(1.5 * 0.5 ** -2.5)


def test_h_examples():
    assert h_of_x(Z, 2, 0, 0.6).value == pytest.approx(0.18, rel=1e-14)
    assert h_of_x(PowerSeries((1,)), 2, -1.3, 0.4).value == pytest.approx(phi(-1.3, 0.4), rel=1e-15)
    assert h_of_x(Z, 2, 1, 0.5).value == pytest.approx(0.125 - 0.125 / 3, rel=1e-14)


@pytest.mark.parametrize("alpha", [-2, -1.5, -1, -0.5, 0, 1])
@pytest.mark.parametrize("x", [1e-4, 0.3, 0.999])
def test_h_against_mpmath(alpha, x):
    f = corpus_generate()[8]
    res = h_of_x(f, 2, alpha, x)
    assert res.value == pytest.approx(oracles.h_p2_mp(f.coeffs, alpha, x), rel=1e-11)


def test_h_derivatives_match_differences():
    f = corpus_generate()[6]
    for p, alpha, x in [(2, -1.5, 0.4), (0.5, -0.5, 0.7), (3.5, 0, 0.2)]:
        h = lambda t: h_of_x(f, p, alpha, float(t), 1e-13).value  # noqa: E731
        d1 = richardson_derivative(h, x, 0.02)
        assert h_prime(f, p, alpha, x) == pytest.approx(d1, rel=1e-6)
        d2 = richardson_derivative(lambda t: h_prime(f, p, alpha, t), x, 0.02)
        assert h_second(f, p, alpha, x) == pytest.approx(d2, rel=1e-6)


def test_area_mean_examples():
    assert area_mean(Z, 2, 0, 0.5) == pytest.approx(0.125, rel=1e-14)
    assert area_mean(PowerSeries((3,)), 1.5, -1.7, 0.8) == pytest.approx(3 ** 1.5, rel=1e-15)
    x = 0.5
    assert area_mean(Z, 2, 1, math.sqrt(x)) == pytest.approx(x * (3 - 2 * x) / (3 * (2 - x)), rel=1e-13)


@pytest.mark.parametrize("p", [0.5, 2.0, 3.5])
def test_hardy_and_area_monotonicity(p):
    x = np.geomspace(1e-4, 0.999, 200)
    for f in corpus_generate()[1:]:
        m = np.asarray(M_of_x(f, p, x))
        assert np.all(np.diff(m) >= -1e-13 * m[1:])
        q = np.asarray(area_mean(f, p, -1.0, np.sqrt(x)))
        assert np.all(np.diff(q) >= -1e-12 * q[1:])


def test_means_point_fields():
    pt = means_point(ONE_PLUS_Z, 2, -1, 0.5)
    assert pt.M == pytest.approx(1.5) and pt.Mp == pytest.approx(1.0)
    assert pt.phi_prime == (1 - 0.5) ** -1
    assert pt.h > 0 and pt.h_err >= 0


def test_profile_memo_is_transparent():
    f = corpus_generate()[7]
    prof = series_profile(f, 1.0)
    x = np.array([0.2, 0.5, 0.77])
    first = prof.value(x)
    again = prof.value(x[::-1])[::-1]
    assert np.array_equal(first, again)
    assert np.array_equal(first, M_of_x(f, 1.0, x))


def test_custom_profile():
    prof = MeanProfile(value=np.exp, derivative=np.exp, label="exp")
    h, _ = profile_h(prof, -1, np.array([0.2, 0.6]))
    ref = [float(oracles.mp.quad(lambda t: oracles.mp.exp(t) / (1 - t), [0, v])) for v in (0.2, 0.6)]
    assert np.allclose(h, ref, rtol=1e-12)
