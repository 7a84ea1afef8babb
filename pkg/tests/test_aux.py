import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from areamean import aux
from areamean.convexity import GridSpec
from areamean.means import phi
from areamean.series import PowerSeries
from areamean.sweep import corpus_generate

Z = PowerSeries.monomial(1)
xs = st.floats(0.05, 0.95)
ys = st.floats(0.0, 5.0)
alphas = st.floats(-1.9, -0.1)


def test_g_function_examples():
    assert aux.g_functions(0, 0.37) == (0.0, 0.0, 0.0)
    g1, _, _ = aux.g_functions(-1, 0.5)
    assert g1 == pytest.approx(0.5 - 0.5 * math.log(2), rel=1e-15)
    _, g2, _ = aux.g_functions(-2, 0.5)
    assert abs(g2) <= 1e-15


def test_abc_examples():
    A, B, C = aux.abc(Z, 2, 0, 0.5)
    assert A == 0 and B == pytest.approx(1.0, rel=1e-13) and C == pytest.approx(0.25, rel=1e-15)
    _, B, _ = aux.abc(PowerSeries((2,)), 1.5, -1.2, 0.3)
    assert B == pytest.approx(1 - 0.3 + 1.2 * 0.3, rel=1e-15)
    _, _, C = aux.abc(Z, 2, -1, 0.5)
    assert C == pytest.approx(0.5, rel=1e-15)


def test_discriminant_examples():
    A, B, C = aux.abc(Z, 2, 0, 0.5)
    assert aux.discriminant(A, B, C) == pytest.approx(1.0, rel=1e-13)
    assert aux.discriminant_expanded(0.3, 0.0, 0.0) == pytest.approx(0.7 ** 2, rel=1e-15)


@given(xs, ys, st.floats(-2, 0))
def test_discriminant_dual_path(x, y, alpha):
    A, B, C = (float(v) for v in aux._abc_y(alpha, x, y))
    d1 = aux.discriminant(np.longdouble(A), B, C)
    d2 = aux.discriminant_expanded(x, y, alpha)
    assert abs(d1 - d2) <= 1e-10 * max(abs(d1), abs(d2))
    if y > 0:
        assert d2 > 0


def test_sandwich_examples():
    lo, up = aux.sandwich_check(Z, 2, -1, 0.5)
    assert lo > 0 and up > 0
    x = 0.5
    A, B, C = aux.abc(PowerSeries((1,)), 2, -1, x)
    S = math.sqrt(B * B - 4 * A * C)
    _, up = aux.sandwich_check(PowerSeries((1,)), 2, -1, x)
    assert up == pytest.approx((B + S) / (2 * A) - phi(-1, x), rel=1e-12)
    lo, up = aux.sandwich_check(PowerSeries.monomial(3), 1, -2, 0.9)
    assert lo >= -1e-9 and up >= -1e-9
    with pytest.raises(ValueError):
        aux.sandwich_check(Z, 2, 0, 0.5)


def test_delta_proxy_examples():
    f = PowerSeries((1, 1))
    assert abs(aux.delta_lower_proxy(f, 2, -1, 1e-6)) <= 1e-5
    A, B, C = aux.abc(PowerSeries((1,)), 2, -1, 0.5)
    d = aux.delta_lower_proxy(PowerSeries((1,)), 2, -1, 0.5)
    assert d == pytest.approx(phi(-1, 0.5) - 2 * C / (B + math.sqrt(B * B - 4 * A * C)), rel=1e-12)
    assert d >= -1e-15
    grid = GridSpec(128).array()
    assert np.all(aux.delta_lower_proxy(Z, 2, -2, grid) >= -1e-9)
    with pytest.raises(ValueError):
        aux.delta_lower_proxy(Z, 2, 0.0, 0.5)


def test_aux_seven_degenerate_and_y_zero():
    assert aux.aux_seven(0.5, 0.3, 0.0).degenerate
    b = aux.aux_seven(0.5, 0.0, -1.0)
    ln2 = math.log(2)
    assert b.S == pytest.approx(abs(ln2 - 1) / ln2, rel=1e-14)
    assert b.B1 == 0.0 and not b.degenerate


@given(xs, ys, alphas)
def test_aux_seven_against_symbolic_definitions(x, y, alpha):
    b = aux.aux_seven(x, y, alpha)
    E, F, S2 = oracles.aux_mp(x, y, alpha)
    scale_e = abs(E) + abs(b.A1 * b.B) + abs(b.A * b.B1) + 1e-300
    scale_f = abs(F) + abs(b.A * b.B * b.B1) + abs(b.A1 * b.B * b.B) + 1e-300
    assert abs(b.E - E) <= 1e-12 * scale_e
    assert abs(b.F - F) <= 1e-12 * scale_f
    assert b.S ** 2 == pytest.approx(S2, rel=1e-12)


@given(xs, ys, alphas)
def test_expanded_forms_agree(x, y, alpha):
    b = aux.aux_seven(x, y, alpha)
    assert abs(b.E - b.E_expanded) <= 1e-10 * max(abs(b.E), abs(b.E_expanded))
    assert abs(b.F - b.F_expanded) <= 1e-10 * max(abs(b.F), abs(b.F_expanded))


@given(xs, alphas)
def test_y0_two_routes(x, alpha):
    a = aux.y0_closed_form(x, alpha)
    b = aux.y0_from_factorization(x, alpha)
    assert a >= 0
    assert b == pytest.approx(a, rel=1e-10, abs=1e-12)


def test_y0_degenerate():
    with pytest.raises(aux.DegenerateError):
        aux.y0_closed_form(0.4, 0.0)


@given(xs, ys, alphas)
def test_factorization_residual(x, y, alpha):
    assert abs(aux.factorization_residual(x, y, alpha)) <= 1e-8


@given(xs, alphas)
def test_factorization_at_special_points(x, alpha):
    b0 = aux.aux_seven(x, 0.0, alpha)
    lhs = b0.F ** 2 - b0.E ** 2 * b0.S ** 2
    assert abs(lhs) <= 1e-9 * max(b0.F ** 2, b0.E ** 2 * b0.S ** 2)
    y0 = aux.y0_closed_form(x, alpha)
    b = aux.aux_seven(x, y0, alpha)
    assert abs(b.F ** 2 - b.E ** 2 * b.S ** 2) <= 1e-8 * max(b.F ** 2, b.E ** 2 * b.S ** 2)


def test_d_examples():
    b = aux.aux_seven(0.995, 0.01, -2.5)
    assert b.E < 0
    for alpha in (-1.5, -1.0, -0.5):
        y0 = aux.y0_closed_form(0.6, alpha)
        assert aux.d_abstract(0.6, y0, alpha) > 0
    f = corpus_generate()[6]
    x = GridSpec(64).array()
    for alpha in (-2.0, -1.0, 0.0):
        d = aux.d_value(f, 1.0, alpha, x)
        assert np.all(d >= -1e-8 * (1 + np.abs(d)))


def test_case_analysis_examples():
    for x, alpha in [(0.5, -1.0), (0.9, -1.99)]:
        s = aux.case_analysis_signs(x, alpha)
        assert s.asserted and s.holds
        assert s.E_at_0 >= 0 and s.E_at_y0 >= 0 and s.F_at_y0 > 0
    s = aux.case_analysis_signs(0.995, -2.5)
    assert not s.asserted and s.E_at_0 < 0


@given(st.floats(0.01, 0.99), st.floats(-1.99, -0.01))
def test_case_analysis_closed_forms_match_bundle(x, alpha):
    s = aux.case_analysis_signs(x, alpha)
    e0 = aux.aux_seven(x, 0.0, alpha).E
    assert s.E_at_0 == pytest.approx(e0, rel=1e-9, abs=1e-15)
    y0 = aux.y0_closed_form(x, alpha)
    b = aux.aux_seven(x, y0, alpha)
    assert s.E_at_y0 == pytest.approx(b.E, rel=1e-6, abs=1e-12)
    assert s.F_at_y0 == pytest.approx(b.F, rel=1e-6, abs=1e-12)


def test_weight_identity():
    x = np.linspace(0, 0.999, 512)
    for alpha in np.linspace(-2, 0, 64):
        assert np.max(np.abs(aux.weight_identity_residual(alpha, x))) <= 1e-13
