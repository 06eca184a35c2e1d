"""Twistor-space coordinates, the hyperholomorphic curvature and its residues.

A point of the twistor space away from ``lambda = infinity`` is ``(t, s,
lambda)`` and stands for the lambda-connection with ``(0,1)`` part ``sum (s_i +
lambda conj(t_i)) conj(omega_i)`` and ``(1,0)`` part ``sum (t_i - lambda
conj(s_i)) omega_i``. The ``infinity`` chart uses ``mu = 1/lambda`` with the
same code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GenusMismatch, LambdaOnDivisor
from .forms import FormExpr, RelClass
from .moduli import DeRhamPoint
from .period import validate

CHARTS = ("zero", "infinity")


@dataclass(frozen=True, eq=False)
class TwistorPoint:
    t: np.ndarray
    s: np.ndarray
    lam: complex
    chart: str = "zero"

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.t, dtype=complex))
        s = np.atleast_1d(np.asarray(self.s, dtype=complex))
        if t.shape != s.shape:
            raise GenusMismatch("t and s must have equal length")
        if self.chart not in CHARTS:
            raise ValueError(f"chart must be one of {CHARTS}")
        lam = complex(self.lam)
        if not np.isfinite(lam):
            raise ValueError("the chart coordinate must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "lam", lam)

    @property
    def genus(self) -> int:
        return len(self.t)

    def zero_chart_lambda(self) -> complex:
        """``lambda`` in the zero chart; raises on the divisor at infinity."""
        if self.chart == "zero":
            return self.lam
        if self.lam == 0:
            raise LambdaOnDivisor("mu = 0 is the divisor at infinity")
        return 1 / self.lam

    def in_chart(self, chart: str) -> "TwistorPoint":
        if chart == self.chart:
            return self
        if self.lam == 0:
            raise LambdaOnDivisor("chart change is undefined on the divisor")
        return TwistorPoint(self.t, self.s, 1 / self.lam, chart)

    def antipode(self) -> "TwistorPoint":
        """Image of ``lambda`` under ``lambda -> -1/conj(lambda)``, landing in the other chart."""
        other = "infinity" if self.chart == "zero" else "zero"
        return TwistorPoint(self.t, self.s, -np.conj(self.lam), other)


def lambda_connection(p: DeRhamPoint, lam: complex) -> tuple[RelClass, RelClass]:
    """The lambda-connection through a harmonic ``nu = nu' + nu''``.

    Returns ``((0,1) part, (1,0) part)`` as classes: the first has
    coefficients ``((lambda+1) s + (lambda-1) conj(t)) / 2`` over
    ``conj(omega_i)``, the second ``((1+lambda) t + (1-lambda) conj(s)) / 2``
    over ``omega_i``.
    """
    lam = complex(lam)
    t, s = p.t, p.s
    zero = np.zeros(p.genus)
    c01 = 0.5 * ((lam + 1) * s + (lam - 1) * t.conj())
    c10 = 0.5 * ((1 + lam) * t + (1 - lam) * s.conj())
    return RelClass.from_parts(zero, c01), RelClass.from_parts(c10, zero)


def preferred_section(p: DeRhamPoint) -> tuple[np.ndarray, np.ndarray]:
    """Twistor coordinates ``(t, s)`` of the line through a harmonic point.

    With ``t = (t' + conj s')/2`` and ``s = (s' - conj t')/2`` the twistor
    lambda-connection equals :func:`lambda_connection` for every ``lambda``.
    """
    return 0.5 * (p.t + p.s.conj()), 0.5 * (p.s - p.t.conj())


def twistor_lambda_connection(tp: TwistorPoint) -> tuple[RelClass, RelClass]:
    lam = tp.zero_chart_lambda()
    zero = np.zeros(tp.genus)
    return (
        RelClass.from_parts(zero, tp.s + lam * tp.t.conj()),
        RelClass.from_parts(tp.t - lam * tp.s.conj(), zero),
    )


def twistor_to_deRham(tp: TwistorPoint) -> DeRhamPoint:
    """``tau = -conj(s) + t / lambda``, ``sigma = s + lambda conj(t)``."""
    lam = tp.zero_chart_lambda()
    if lam == 0:
        raise LambdaOnDivisor("lambda = 0 lies on the divisor D_0")
    return DeRhamPoint(-tp.s.conj() + tp.t / lam, tp.s + lam * tp.t.conj())


def _differentials(tp: TwistorPoint, g: int):
    """``d tau_i`` and ``d sigma_i`` in the active chart (``dl`` is ``d lambda`` or ``d mu``)."""
    dtau, dsig = [], []
    for i in range(g):
        k = i + 1
        dt, ds = FormExpr.gen(f"dt{k}"), FormExpr.gen(f"ds{k}")
        dtb, dsb = FormExpr.gen(f"dtb{k}"), FormExpr.gen(f"dsb{k}")
        dl = FormExpr.gen("dl")
        ti, tbi = tp.t[i], np.conj(tp.t[i])
        if tp.chart == "zero":
            # tau = -sbar + t/l, sigma = s + l tbar
            dtau.append(-dsb + dt.lam(-1) - (dl * ti).lam(-2))
            dsig.append(ds + dtb.lam(1) + dl * tbi)
        else:
            # tau = -sbar + mu t, sigma = s + tbar/mu
            dtau.append(-dsb + dt.lam(1) + dl * ti)
            dsig.append(ds + dtb.lam(-1) - (dl * tbi).lam(-2))
    return dtau, dsig


def pullback_curvature(omega, tp: TwistorPoint) -> FormExpr:
    """``-(2/pi) sum Y_ij d tau_i ^ d sigma_j`` in twistor coordinates.

    Coefficients are Laurent polynomials in the chart coordinate.
    """
    omega = validate(omega)
    g = omega.genus
    if tp.genus != g:
        raise GenusMismatch("twistor point genus does not match period matrix")
    if tp.lam == 0:
        raise LambdaOnDivisor("the chart coordinate vanishes on the divisor")
    Y = omega.imag
    dtau, dsig = _differentials(tp, g)
    out = FormExpr.zero()
    for i in range(g):
        for j in range(g):
            if Y[i, j]:
                out = out + dtau[i].wedge(dsig[j]) * (-2 / math.pi * Y[i, j])
    return out


def hklr_forms(omega) -> tuple[FormExpr, FormExpr]:
    """``Phi_1 = (i/2pi) sum Y_ij (dt_i ^ dtb_j + ds_i ^ dsb_j)`` and ``Phi_2 + i Phi_3 = (1/pi) sum Y_ij ds_i ^ dt_j``."""
    omega = validate(omega)
    g, Y = omega.genus, omega.imag
    phi1, phi23 = FormExpr.zero(), FormExpr.zero()
    for i in range(g):
        for j in range(g):
            y = Y[i, j]
            a, b = i + 1, j + 1
            phi1 = phi1 + FormExpr.monomial((f"dt{a}", f"dtb{b}"), 1j * y / (2 * math.pi))
            phi1 = phi1 + FormExpr.monomial((f"ds{a}", f"dsb{b}"), 1j * y / (2 * math.pi))
            phi23 = phi23 + FormExpr.monomial((f"ds{a}", f"dt{b}"), y / math.pi)
    return phi1, phi23


def _proportionality(F: FormExpr, Phi: FormExpr) -> tuple[complex, float]:
    keys = sorted(set(F.terms) | set(Phi.terms))
    f = np.array([F.terms.get(k, {}).get(0, 0) for k in keys])
    p = np.array([Phi.terms.get(k, {}).get(0, 0) for k in keys])
    c = complex(np.vdot(p, f) / np.vdot(p, p))
    return c, float(np.max(np.abs(f - c * p), initial=0.0))


@dataclass
class FiberDecomposition:
    constants: dict
    residuals: dict
    extra_degrees: list

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def spread(self) -> float:
        """Largest difference between the three proportionality constants."""
        c = list(self.constants.values())
        return max(abs(x - y) for x in c for y in c)


def fiber_decomposition_check(omega, tp: TwistorPoint) -> FiberDecomposition:
    """Fit the ``lambda^-1, lambda^0, lambda^1`` parts of the fiber curvature to HKLR forms.

    Degree ``-1`` is compared with ``Phi_2 + i Phi_3``, degree 0 with ``2i Phi_1``
    and degree 1 with ``Phi_2 - i Phi_3``. The fitted constants are reported,
    not asserted.
    """
    if tp.chart != "zero":
        tp = tp.in_chart("zero")
    F = pullback_curvature(omega, tp).without("dl")
    phi1, phi23 = hklr_forms(omega)
    targets = {-1: phi23, 0: phi1 * 2j, 1: phi23.conj()}
    consts, res = {}, {}
    for d, Phi in targets.items():
        consts[d], res[d] = _proportionality(F.lambda_part(d), Phi)
    extra = sorted(F.degrees() - set(targets))
    return FiberDecomposition(consts, res, extra)


def fiber_reality_check(omega, tp: TwistorPoint) -> dict:
    """Reality structure of the fiber curvature at a numeric ``lambda``.

    For ``|lambda| = 1`` the degree-0 part is imaginary (``conj = -itself``)
    while ``lambda^-1 A + lambda B`` of the two outer degrees is real
    (``conj = itself``). Returns both residuals.
    """
    if tp.chart != "zero":
        tp = tp.in_chart("zero")
    lam = tp.zero_chart_lambda()
    F = pullback_curvature(omega, tp).without("dl")
    mid = F.lambda_part(0)
    outer = F.lambda_part(-1) * (1 / lam) + F.lambda_part(1) * lam
    return {
        "imaginary_part_residual": (mid.conj() + mid).max_abs(),
        "real_part_residual": (outer.conj() - outer).max_abs(),
        "whole_form_imaginary_residual": (F.evaluate(lam).conj() + F.evaluate(lam)).max_abs(),
    }


def connection_residue(omega, t, s=None) -> FormExpr:
    """Residue at ``lambda = 0``: ``-(1/pi) sum Y_ij t_i ds_j``, the tautological 1-form."""
    omega = validate(omega)
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    if len(t) != omega.genus:
        raise GenusMismatch("t has wrong length")
    Y = omega.imag
    coeff = -(Y.T @ t) / math.pi
    out = FormExpr.zero()
    for j, c in enumerate(coeff):
        out = out + FormExpr.monomial((f"ds{j + 1}",), c)
    return out


def residue_limit_genus1(
    tau: complex,
    t: complex,
    s: complex,
    lams=(0.1, 0.05, 0.025),
    q_ell=0.31 + 0.27j,
    q_m=0.68 + 0.61j,
) -> tuple[complex, list]:
    """Numeric ``lim_{lambda -> 0} lambda * (ds-coefficient of tr_{Div m}(nabla l / l))``.

    ``l`` and ``m`` are sections over the image point ``twistor_to_deRham(t, s,
    lambda)``; the ``ds`` coefficient of the pulled-back trace equals the
    ``d sigma`` coefficient. The values for each ``lambda`` are fitted by a
    quadratic and extrapolated to 0. The poles ``q_ell`` and ``q_m`` are given
    in lattice coordinates: ``x + iy`` stands for the point ``x + y tau``.
    """
    from .surface import EllipticSurface, SectionData, trace_connection_on_section

    S = EllipticSurface(tau)
    ql = complex(q_ell).real + complex(q_ell).imag * S.tau
    qm = complex(q_m).real + complex(q_m).imag * S.tau
    vals = []
    for lam in lams:
        p = twistor_to_deRham(TwistorPoint([t], [s], lam))
        tt, ss = p.t[0], p.s[0]
        ell = SectionData.build(S, [ql], tt, ss)
        m = SectionData.build(S, [qm], tt, ss)
        vals.append(lam * trace_connection_on_section(S, ell, m)[1])
    coef = np.polyfit(np.asarray(lams, dtype=float), np.asarray(vals), len(lams) - 1)
    return complex(coef[-1]), [complex(v) for v in vals]
