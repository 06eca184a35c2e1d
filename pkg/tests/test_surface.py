import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delpair import surface as sf
from delpair.errors import DivisorCollision, PoleAtEvaluationPoint
from delpair.moduli import betti_of_deRham

TAU = 0.3 + 1.2j


@pytest.fixture
def S():
    return sf.EllipticSurface(TAU)


def test_default_base_point(S):
    assert S.sigma == pytest.approx(0.1 + 0.1 * TAU)
    assert sf.EllipticSurface(1j, 0.2).sigma == 0.2


def test_theta11_quasi_periodicity():
    x = 0.23 + 0.41j
    assert sf.theta11(x + 1, TAU) == pytest.approx(-sf.theta11(x, TAU), rel=1e-12)
    expect = -np.exp(-1j * math.pi * TAU - 2j * math.pi * x) * sf.theta11(x, TAU)
    assert sf.theta11(x + TAU, TAU) == pytest.approx(expect, rel=1e-12)


def test_theta11_prime_at_i():
    # -2 pi eta(i)^3 with eta(i) = Gamma(1/4) / (2 pi^(3/4))
    eta = math.gamma(0.25) / (2 * math.pi**0.75)
    assert sf.theta11_prime0(1j) == pytest.approx(-2 * math.pi * eta**3, rel=1e-13)


def test_prime_form_basics():
    z = 0.3 + 0.2j
    assert sf.prime_form(z, z, TAU) == 0
    h = 1e-4
    assert abs(sf.prime_form(0, h, TAU) / h - 1) < 1e-6


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_prime_form_odd(a, b, c, d):
    z, w = complex(a, b), complex(c, d)
    e1, e2 = sf.prime_form(z, w, TAU), sf.prime_form(w, z, TAU)
    assert abs(e1 + e2) <= 1e-12 * max(1.0, abs(e1))


def test_trivial_section_is_one(S):
    d = sf.SectionData.trivial()
    z = np.array([0.3 + 0.1j, 0.7 + 0.9j])
    np.testing.assert_allclose(sf.section_value(S, d, z), 1.0)


def test_trivial_function(S):
    f = sf.FunctionData.trivial()
    assert sf.function_value(S, f, 0.4 + 0.3j) == 1
    assert sf.dlogf(S, f, 0.4 + 0.3j) == 0


def test_build_satisfies_divisor_equation(S, rng):
    d = sf.random_section_data(S, rng, 0.2 - 0.1j, 0.3 + 0.4j, n_fixed=2)
    assert d.divisor_residual(S) < 1e-13
    d.check(S)


@settings(max_examples=25)
@given(st.integers(0, 2**31))
def test_section_multipliers_match_holonomy(seed):
    rng = np.random.default_rng(seed)
    S = sf.EllipticSurface(TAU)
    t, s = complex(*rng.uniform(-1, 1, 2)), complex(*rng.uniform(-1, 1, 2))
    d = sf.random_section_data(S, rng, t, s)
    z1 = 0.05 + 0.95 * rng.uniform() + 0.9j * rng.uniform() * TAU.imag
    z2 = z1 + 0.13 + 0.07j
    if min(S.lattice_distance(z, p) for z in (z1, z2) for p in np.concatenate([d.p, d.q])) < 0.05:
        return
    a1, _ = sf.section_multipliers(S, d, z1)
    a2, _ = sf.section_multipliers(S, d, z2)
    assert abs(sf.reduce_mod_2pi_i(a1 - a2)) < 1e-10
    assert sf.betti_multiplier_residual(S, d, z1) < 1e-9
    _, lb = sf.section_multipliers(S, d, z1)
    chi = betti_of_deRham(d.point, TAU)
    assert abs(lb.real - (2j * math.pi * chi.b[0]).real) < 1e-8


@settings(max_examples=25)
@given(st.integers(0, 2**31))
def test_function_is_elliptic(seed):
    rng = np.random.default_rng(seed)
    S = sf.EllipticSurface(TAU)
    f = sf.random_function_data(S, rng)
    z = 0.5 + 0.37j
    if min(S.lattice_distance(z, p) for p in f.points) < 0.05:
        return
    assert abs(sf.function_value(S, f, z + 1) / sf.function_value(S, f, z) - 1) < 1e-10
    assert abs(sf.function_value(S, f, z + TAU) / sf.function_value(S, f, z) - 1) < 1e-10


def test_residue_at_zero(S, rng):
    f = sf.random_function_data(S, rng)
    assert abs(sf.contour_residue(S, f, f.x[0]) - 2j * math.pi) < 1e-6
    assert abs(sf.contour_residue(S, f, f.y[0]) + 2j * math.pi) < 1e-6


def test_dlogf_periods_quadrature(S, rng):
    f = sf.random_function_data(S, rng)
    np.testing.assert_allclose(sf.dlogf_periods_quad(S, f), sf.dlogf_periods(f), atol=1e-6)


def test_connection_form_trivial(S):
    z = 0.4 + 0.3j
    c = sf.connection_form(S, sf.SectionData.trivial(), z)
    assert c[0] == 0
    assert c[1] == pytest.approx((z - S.sigma) - np.conj(z - S.sigma))


def test_connection_form_vs_fd(S, rng):
    d = sf.random_section_data(S, rng, 0.1 + 0.2j, -0.3 + 0.1j)
    for z in (0.45 + 0.5j, 0.8 + 0.2j):
        if min(S.lattice_distance(z, p) for p in np.concatenate([d.p, d.q])) < 0.1:
            continue
        a = sf.connection_form(S, d, z)
        b = sf.connection_form_fd(S, d, z)
        assert np.max(np.abs(a - b)) < 1e-6 * max(1, np.max(np.abs(a)))


def test_pole_raises(S, rng):
    d = sf.random_section_data(S, rng, 0, 0.1)
    with pytest.raises(PoleAtEvaluationPoint):
        sf.section_value(S, d, d.q[0])


def test_weil_residual_trivial_function(S, rng):
    d = sf.random_section_data(S, rng, 0.2, 0.3j)
    np.testing.assert_array_equal(sf.weil_residual(S, d, sf.FunctionData.trivial()), 0)


def test_weil_collision(S, rng):
    f = sf.random_function_data(S, rng)
    d = sf.SectionData.build(S, [f.x[0]], 0, 0.2)
    with pytest.raises(DivisorCollision):
        sf.weil_residual(S, d, f)


@settings(max_examples=25)
@given(st.integers(0, 2**31), st.booleans())
def test_weil_reciprocity(seed, unitary):
    rng = np.random.default_rng(seed)
    S = sf.EllipticSurface(TAU)
    s = complex(*rng.uniform(0.1, 0.5, 2))
    t = -np.conj(s) if unitary else complex(*rng.uniform(-0.5, 0.5, 2))
    f = sf.random_function_data(S, rng)
    d = sf.SectionData.build(S, [sf.random_function_data(S, rng).x[0]], t, s)
    try:
        r = sf.weil_residual(S, d, f)
    except DivisorCollision:
        return
    assert np.max(np.abs(r)) < 1e-8
    # multiplying the section by an elliptic function leaves the residual unchanged
    g = sf.random_function_data(S, rng)
    try:
        r2 = sf.weil_residual(S, d.times(g), f)
    except DivisorCollision:
        return
    assert np.max(np.abs(r2 - r)) < 1e-8


def test_base_covectors_have_zero_trace(S, rng):
    f = sf.random_function_data(S, rng)
    c = np.array([1.3 - 0.2j, 0.4j])
    tr = sf.divisor_trace(f.orders, np.tile(c, (len(f.orders), 1)))
    assert np.max(np.abs(tr)) == 0


def test_reciprocity_I_trivial(S):
    assert sf.reciprocity_I(S, "omega", sf.FunctionData.trivial()) == 0


@given(st.integers(0, 2**31))
def test_reciprocity_I(seed):
    S = sf.EllipticSurface(TAU)
    f = sf.random_function_data(S, np.random.default_rng(seed))
    assert abs(sf.reciprocity_I(S, "omega", f)) < 1e-8
    assert abs(sf.reciprocity_I(S, "omegabar", f)) < 1e-8


@given(st.integers(0, 2**31))
def test_reciprocity_II(seed):
    rng = np.random.default_rng(seed)
    S = sf.EllipticSurface(TAU)
    f, g = sf.random_function_data(S, rng), sf.random_function_data(S, rng)
    try:
        a = sf.reciprocity_II(S, f, g)
    except DivisorCollision:
        return
    assert abs(a) < 1e-8
    assert abs(sf.reduce_mod_2pi_i(a + sf.reciprocity_II(S, g, f))) < 1e-8
    assert sf.reciprocity_II(S, f, sf.FunctionData.trivial()) == 0


def test_gm_curvature_periods():
    S = sf.EllipticSurface(1j)
    rep = sf.gm_from_curvature_check(S, [(-0.2 + 0.1j, 0.2 + 0.1j)])
    assert rep.max_residual < 1e-6
    per = rep.periods[0]
    assert per["t"] == pytest.approx((1, 1j), abs=1e-6)
    assert per["s"] == pytest.approx((1, -1j), abs=1e-6)
