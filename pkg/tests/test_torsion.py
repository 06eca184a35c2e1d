import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delpair import torsion as tr
from delpair.errors import SingularPrymMatrix, ThetaZeroOnDivisor, TrivialCharacter
from delpair.period import random_period_matrix, validate
from delpair.theta import log_theta_norm, theta

# frozen from the closed-form spectral oracle, cross-checked across heat-time splits
OFFSET_I = 0.5273441405
OFFSET_GENERIC = 0.7329447417


def test_log_T_kappa_at_origin():
    om = validate([[0.2 + 1.1j, 0.1 + 0.3j], [0.1 + 0.3j, -0.4 + 1.6j]])
    pt = tr.TorsionPoint.make(om, [0, 0], [0, 0])
    expect = theta(np.zeros(2), om).log() + theta(np.zeros(2), om.conj_neg()).log()
    assert abs(tr.log_T_kappa(pt) - expect) < 1e-13


def test_unitary_kappa_matches_split():
    om = validate(1j)
    s = np.array([0.3 + 0.2j])
    pt = tr.unitary_point(om, s)
    whole = tr.log_T_kappa(pt).real
    # on the locus each unitary factor carries the whole value; flatness is about derivatives
    assert abs(whole - tr.log_T_unitary_X(pt)) < 1e-12
    assert abs(whole - tr.log_T_unitary_Xbar(pt)) < 1e-12


def test_theta_zero_raises():
    z0 = tr.theta_zero_genus1(1j)
    assert abs(z0 - (0.5 + 0.5j)) < 1e-12
    pt = tr.TorsionPoint.make(1j, [0.1], [math.pi * z0])
    with pytest.raises(ThetaZeroOnDivisor):
        tr.log_T_kappa(pt)


def test_unitary_X_real_s():
    om = validate(0.2 + 1.3j)
    pt = tr.TorsionPoint.make(om, [0], [0.7])
    z = om.imag @ np.array([0.7]) / math.pi
    assert tr.log_T_unitary_X(pt) == pytest.approx(theta(z, om).log_abs2(), abs=1e-13)


@given(st.integers(1, 3), st.integers(0, 2**31))
def test_unitary_X_is_theta_norm(g, seed):
    rng = np.random.default_rng(seed)
    om = random_period_matrix(g, rng)
    s = 0.4 * (rng.normal(size=g) + 1j * rng.normal(size=g))
    pt = tr.TorsionPoint.make(om, np.zeros(g), s)
    u = -om.imag @ s / math.pi
    assert abs(tr.log_T_unitary_X(pt) - log_theta_norm(u, om)) < 1e-10
    m, n = rng.integers(-2, 3, g), rng.integers(-2, 3, g)
    shift = -math.pi * np.linalg.solve(om.imag, m + om.omega @ n)
    pt2 = tr.TorsionPoint.make(om, np.zeros(g), s + shift)
    assert abs(tr.log_T_unitary_X(pt2) - tr.log_T_unitary_X(pt)) < 1e-9


@settings(max_examples=20)
@given(st.integers(1, 2), st.integers(0, 2**31), st.sampled_from(["kappa", "unitaryX", "unitaryXbar"]))
def test_dlog_analytic_vs_fd(g, seed, which):
    rng = np.random.default_rng(seed)
    om = random_period_matrix(g, rng)
    c = lambda: 0.3 * (rng.normal(size=g) + 1j * rng.normal(size=g))
    pt = tr.TorsionPoint.make(om, c(), c())
    a = tr.dlog_torsion(pt, which)
    b = tr.dlog_torsion(pt, which, method="fd")
    assert np.max(np.abs(a - b)) < 1e-6 * max(1.0, np.max(np.abs(a)))


def test_dlog_structure():
    pt = tr.TorsionPoint.make(1j, [0.2 + 0.1j], [-0.3j])
    assert tr.dlog_torsion(pt, "unitaryXbar")[1] == 0
    assert tr.dlog_torsion(pt, "unitaryX")[0] == 0
    with pytest.raises(ValueError):
        tr.dlog_torsion(pt, "kappa", method="spline")


def test_flatness_example():
    assert tr.flatness_residual(tr.unitary_point(1j, [0.3 + 0.2j])) <= 1e-9


def test_flatness_grid():
    om = validate(1 + 2j)
    v = np.linspace(0.1, 0.5, 5)
    worst = max(tr.flatness_residual(tr.unitary_point(om, [x + 1j * y])) for x in v for y in v)
    assert worst <= 1e-8


def test_flatness_fails_off_locus():
    om = validate(1j)
    t, s = np.array([0.2 + 0.1j]), np.array([0.3 + 0.2j])
    pt = tr.TorsionPoint.make(om, t, s)
    d = tr.flatness_difference(pt)
    assert tr.flatness_residual(pt) > 1e-3
    assert abs(d[1] - (t + s.conj())[0] / math.pi) < 1e-12


@given(st.integers(1, 3), st.integers(0, 2**31))
def test_flatness_property(g, seed):
    rng = np.random.default_rng(seed)
    om = random_period_matrix(g, rng)
    s = 0.1 + 0.4 * (rng.uniform(size=g) + 1j * rng.uniform(size=g))
    try:
        r = tr.flatness_residual(tr.unitary_point(om, s))
    except ThetaZeroOnDivisor:
        return
    assert r <= 1e-8


def test_holo_torsion_examples():
    om = validate([[0.1 + 1.2j, 0.2j], [0.2j, 0.3 + 0.9j]])
    base = tr.holo_torsion_ab([0, 0], [0, 0], om)
    expect = theta(np.zeros(2), om).value() * theta(np.zeros(2), om.conj_neg()).value()
    assert abs(base - expect) < 1e-12 * abs(expect)
    a, b = np.array([0.3, -0.1]), np.array([0.2, 0.45])
    v = tr.holo_torsion_ab(a, b, om)
    assert abs(tr.holo_torsion_ab(a + [1, 0], b, om) / v - 1) < 1e-9
    assert abs(tr.holo_torsion_ab(a, b + [0, 1], om) / v - 1) < 1e-9
    assert abs(v.imag) < 1e-12 * abs(v)
    assert abs(tr.log_holo_torsion_ab(a, b, om).real - log_theta_norm(b - om.omega.T @ a, om)) < 1e-9


@given(st.integers(2, 3), st.integers(0, 2**31))
def test_prym_positive_and_scale_free(g, seed):
    rng = np.random.default_rng(seed)
    om = random_period_matrix(g, rng)
    pd = tr.conjugate_symmetric_prym(g, rng)
    a, b = rng.uniform(-0.5, 0.5, g), rng.uniform(-0.5, 0.5, g)
    try:
        v = tr.general_torsion_from_prym(pd, a, b, om)
    except SingularPrymMatrix:
        return
    assert np.isfinite(v)
    assert v.real > 0 and abs(v.imag) < 1e-9 * abs(v)
    w = tr.general_torsion_from_prym(pd.scaled(2.0), a, b, om)
    assert abs(w / v - 1) < 1e-10


def test_prym_singular():
    pd = tr.PrymData(np.eye(2), [[0.0]], [[1.0]], [[1.0]], [0.1, 0.2])
    with pytest.raises(SingularPrymMatrix):
        tr.general_torsion_from_prym(pd, [0, 0], [0, 0], 1j * np.eye(2))
    with pytest.raises(ValueError):
        tr.PrymData(np.eye(2), [[1.0]], [[1.0]], [[1.0]], [0.1])


def test_spectral_symmetries():
    u = 0.3 + 0.2j
    v = tr.spectral_log_det_genus1(u, 1j)
    assert abs(tr.spectral_log_det_genus1(u + 1, 1j) - v) < 1e-5
    assert abs(tr.spectral_log_det_genus1(-u, 1j) - v) < 1e-5


def test_spectral_offset_constant():
    us = (0.1 + 0.05j, 0.3 + 0.2j, -0.2 + 0.35j, 0.45 - 0.1j)
    offs = [tr.spectral_offset_genus1(u, 1j) for u in us]
    assert max(offs) - min(offs) < 1e-4
    assert offs[0] == pytest.approx(OFFSET_I, abs=1e-8)
    offs = [tr.spectral_offset_genus1(u, 0.3 + 1.4j, t0) for u in us for t0 in (0.5, 1.0, 2.0)]
    assert max(offs) - min(offs) < 1e-8
    assert offs[0] == pytest.approx(OFFSET_GENERIC, abs=1e-8)


def test_spectral_trivial_character():
    with pytest.raises(TrivialCharacter):
        tr.spectral_log_det_genus1(-0.5 - 0.5j, 1j)
