import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delpair import twistor as tw
from delpair.errors import LambdaOnDivisor
from delpair.forms import FormExpr
from delpair.moduli import DeRhamPoint
from delpair.period import random_period_matrix, validate


def _pt(rng, g):
    c = lambda: rng.normal(size=g) + 1j * rng.normal(size=g)
    return DeRhamPoint(c(), c())


def test_lambda_connection_examples(rng):
    p = _pt(rng, 2)
    c01, c10 = tw.lambda_connection(p, 1)
    np.testing.assert_allclose(c01.coeffs, np.concatenate([[0, 0], p.s]))
    np.testing.assert_allclose(c10.coeffs, np.concatenate([p.t, [0, 0]]))
    c01, _ = tw.lambda_connection(p, -1)
    np.testing.assert_allclose(c01.coeffs[2:], -p.t.conj())
    c01, c10 = tw.lambda_connection(p, 0)
    np.testing.assert_allclose(c01.coeffs[2:], 0.5 * (p.s - p.t.conj()))
    np.testing.assert_allclose(c10.coeffs[:2], 0.5 * (p.t + p.s.conj()))


def test_twistor_to_deRham_examples():
    p = tw.twistor_to_deRham(tw.TwistorPoint([0.3 + 0.4j], [0], 1))
    assert p.t[0] == 0.3 + 0.4j and p.s[0] == 0.3 - 0.4j
    with pytest.raises(LambdaOnDivisor):
        tw.twistor_to_deRham(tw.TwistorPoint([1], [1], 0))


@given(st.integers(1, 3), st.integers(0, 2**31), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_preferred_section_reproduces_lambda_connection(g, seed, lam):
    p = _pt(np.random.default_rng(seed), g)
    t, s = tw.preferred_section(p)
    tp = tw.TwistorPoint(t, s, lam)
    a01, a10 = tw.twistor_lambda_connection(tp)
    b01, b10 = tw.lambda_connection(p, lam)
    scale = max(1.0, abs(lam))
    assert np.max(np.abs(a01.coeffs - b01.coeffs)) < 1e-12 * scale * 10
    assert np.max(np.abs(a10.coeffs - b10.coeffs)) < 1e-12 * scale * 10
    if lam == 1:
        q = tw.twistor_to_deRham(tp)
        assert np.max(np.abs(q.t - p.t)) < 1e-12


def test_chart_round_trip():
    tp = tw.TwistorPoint([0.1], [0.2j], 2j)
    inf = tp.in_chart("infinity")
    assert inf.lam == pytest.approx(-0.5j)
    assert inf.zero_chart_lambda() == pytest.approx(2j)
    assert inf.in_chart("zero").lam == pytest.approx(2j)
    assert tp.antipode().zero_chart_lambda() == pytest.approx(-1 / np.conj(2j))
    with pytest.raises(LambdaOnDivisor):
        tw.TwistorPoint([0], [0], 0, "infinity").zero_chart_lambda()


def test_pullback_curvature_examples():
    F = tw.pullback_curvature(1j, tw.TwistorPoint([0], [0.3], 0.7))
    assert not any("dl" in k for k in F.terms)
    G = tw.pullback_curvature(1j, tw.TwistorPoint([0.2 + 0.1j], [0.3], 1)).evaluate(1)
    assert G.coefficient(["dt1", "ds1"]) == pytest.approx(-2 / math.pi, abs=1e-15)


@given(st.integers(1, 3), st.integers(0, 2**31), st.sampled_from(["zero", "infinity"]))
def test_curvature_degree_window(g, seed, chart):
    rng = np.random.default_rng(seed)
    om = random_period_matrix(g, rng)
    p = _pt(rng, g)
    F = tw.pullback_curvature(om, tw.TwistorPoint(p.t, p.s, 0.7 + 0.2j, chart))
    assert F.degrees() <= set(range(-2, 2))
    if chart == "zero":
        assert F.without("dl").degrees() == {-1, 0, 1}


def test_hklr_genus1():
    phi1, phi23 = tw.hklr_forms(1j)
    expect = FormExpr.monomial(["dt1", "dtb1"], 1j / (2 * math.pi)) + FormExpr.monomial(["ds1", "dsb1"], 1j / (2 * math.pi))
    assert phi1.distance(expect) < 1e-16
    assert phi1.conj().distance(phi1) < 1e-16
    assert phi23.degrees() == {0}


@settings(max_examples=25)
@given(st.integers(1, 3), st.integers(0, 2**31), st.sampled_from([0.5, 1.0, 2j]))
def test_fiber_decomposition(g, seed, lam):
    rng = np.random.default_rng(seed)
    om = random_period_matrix(g, rng)
    p = _pt(rng, g)
    d = tw.fiber_decomposition_check(om, tw.TwistorPoint(p.t, p.s, lam))
    assert d.max_residual < 1e-12
    assert d.spread < 1e-12
    assert d.extra_degrees == []
    # measured common constant (unit normalization would give 1)
    assert abs(d.constants[0] - 2) < 1e-12


def test_fiber_reality_structure():
    om = validate(0.2 + 1.3j)
    r = tw.fiber_reality_check(om, tw.TwistorPoint([0.3 - 0.1j], [-0.2 + 0.4j], np.exp(0.7j)))
    assert r["imaginary_part_residual"] < 1e-14
    assert r["real_part_residual"] < 1e-14
    # the whole fiber form is not imaginary: the outer degrees are real
    assert r["whole_form_imaginary_residual"] > 1e-3


def test_connection_residue_examples():
    assert tw.connection_residue(1j, [0]).is_zero()
    R = tw.connection_residue(1j, [math.pi])
    assert R.distance(FormExpr.gen("ds1") * -1) < 1e-15


def test_residue_limit():
    lim, vals = tw.residue_limit_genus1(1j, 0.2 + 0.1j, -0.1 + 0.15j)
    expect = tw.connection_residue(1j, [0.2 + 0.1j]).coefficient(["ds1"])
    assert abs(lim - expect) / abs(expect) < 1e-4
    assert len(vals) == 3
