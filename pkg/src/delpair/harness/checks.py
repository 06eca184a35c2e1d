"""Named verification checks and the suite runner."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .. import forms, moduli, surface, torsion, twistor
from ..errors import (
    DelpairError,
    GenusMismatch,
    InvalidTask,
    NotPositiveDefiniteImaginaryPart,
    NotSymmetric,
)
from ..jsonio import array_from_json, cplx_from_json
from ..period import random_period_matrix, validate
from .report import VerificationReport, VerificationTask

INVALID_INPUT = (InvalidTask, NotSymmetric, NotPositiveDefiniteImaginaryPart, GenusMismatch)
S_BOX = (0.1, 0.5)


def box_grid(n: int, lo: float = S_BOX[0], hi: float = S_BOX[1]) -> np.ndarray:
    """``n x n`` grid of complex numbers with real and imaginary parts in ``[lo, hi]``."""
    v = np.linspace(lo, hi, n) if n > 1 else np.array([0.5 * (lo + hi)])
    return (v[:, None] + 1j * v[None, :]).ravel()


def uniform_complex(rng: np.random.Generator, size, lo: float = -0.5, hi: float = 0.5) -> np.ndarray:
    return rng.uniform(lo, hi, size) + 1j * rng.uniform(lo, hi, size)


def _scalar(v) -> complex:
    v = np.ravel(array_from_json(v))
    return complex(v[0]) if len(v) else 0j


def _section_from_json(d: dict) -> surface.SectionData:
    return surface.SectionData(
        array_from_json(d.get("p", [])),
        array_from_json(d.get("q", [])),
        int(np.ravel(d.get("m", 0))[0]),
        int(np.ravel(d.get("n", 0))[0]),
        cplx_from_json(d.get("t", 0)),
        cplx_from_json(d.get("s", 0)),
    )


def _function_from_json(d: dict) -> surface.FunctionData:
    return surface.FunctionData(
        array_from_json(d.get("x", [])),
        array_from_json(d.get("y", [])),
        int(np.ravel(d.get("mt", 0))[0]),
        int(np.ravel(d.get("nt", 0))[0]),
    )


def _surface(task: VerificationTask) -> surface.EllipticSurface:
    om = validate(task.period())
    if om.genus != 1:
        raise InvalidTask(f"check {task.check!r} runs on genus-one curves")
    return surface.EllipticSurface(complex(om.omega[0, 0]), task.params.get("sigma"))


# individual checks ----------------------------------------------------------------


def check_reciprocity(task: VerificationTask, rep: VerificationReport) -> None:
    S = _surface(task)
    if "section" in task.params or "function" in task.params:
        ell = _section_from_json(task.params.get("section", {}))
        f = _function_from_json(task.params.get("function", {}))
        r = surface.weil_residual(S, ell, f)
        rep.add({"t": ell.t, "s": ell.s}, np.max(np.abs(r)))
        return
    rng = np.random.default_rng(task.seed)
    configs = int(task.params.get("configs", 5))
    for k in range(configs):
        f = surface.random_function_data(S, rng)
        q = surface.random_function_data(S, rng).x[0]
        for s in box_grid(task.grid):
            for label, t in (("unitary", -np.conj(s)), ("generic", complex(uniform_complex(rng, None)))):
                ell = surface.SectionData.build(S, [q], t, s)
                r = surface.weil_residual(S, ell, f)
                rep.add({"config": k, "locus": label, "t": t, "s": s}, np.max(np.abs(r)))


def check_reciprocity1(task: VerificationTask, rep: VerificationReport) -> None:
    S = _surface(task)
    rng = np.random.default_rng(task.seed)
    worst_contour = 0.0
    for k in range(task.grid * task.grid):
        f = surface.random_function_data(S, rng)
        r = max(abs(surface.reciprocity_I(S, c, f)) for c in ("omega", "omegabar"))
        exact = np.array(surface.dlogf_periods(f))
        quad = np.array(surface.dlogf_periods_quad(S, f))
        worst_contour = max(worst_contour, float(np.max(np.abs(exact - quad))))
        rep.add({"function": k}, r)
    rep.limits.append({"name": "contour_periods", "value": worst_contour, "tol": 1e-6})


def check_reciprocity2(task: VerificationTask, rep: VerificationReport) -> None:
    S = _surface(task)
    rng = np.random.default_rng(task.seed)
    for k in range(task.grid * task.grid):
        f = surface.random_function_data(S, rng)
        g = surface.random_function_data(S, rng)
        a = surface.reciprocity_II(S, f, g)
        b = surface.reciprocity_II(S, g, f)
        r = max(abs(a), abs(surface.reduce_mod_2pi_i(a + b)))
        rep.add({"pair": k}, r)


def check_flatness(task: VerificationTask, rep: VerificationReport) -> None:
    om = validate(task.period())
    g = om.genus
    rng = np.random.default_rng(task.seed)
    if g == 1:
        svals = [np.array([s]) for s in box_grid(task.grid)]
    else:
        svals = [S_BOX[0] + (S_BOX[1] - S_BOX[0]) * (rng.uniform(size=g) + 1j * rng.uniform(size=g)) for _ in range(task.grid**2)]
    for s in svals:
        pt = torsion.unitary_point(om, s)
        rep.add({"s": s}, torsion.flatness_residual(pt))
    off = []
    for _ in range(3):
        s = S_BOX[0] + (S_BOX[1] - S_BOX[0]) * (rng.uniform(size=g) + 1j * rng.uniform(size=g))
        t = -s.conj() + 0.3 * uniform_complex(rng, g)
        off.append({"t": t, "s": s, "residual": torsion.flatness_residual(torsion.TorsionPoint.make(om, t, s))})
    rep.constants["off_locus"] = off
    rep.constants["off_locus_min"] = min(o["residual"] for o in off)


def _curvature_omegas(task: VerificationTask) -> list:
    if task.omega is not None or task.tau is not None:
        return [validate(task.period())]
    rng = np.random.default_rng(task.seed)
    genera = task.params.get("genera", [1, 2, 3])
    return [random_period_matrix(g, rng) for g in genera for _ in range(task.grid)]


def check_curvature(task: VerificationTask, rep: VerificationReport) -> None:
    frozen_zero = True
    for om in _curvature_omegas(task):
        g = om.genus
        univ = moduli.gm_invariant(g)
        F = forms.intersection_curvature(om, univ, univ)
        rep.add({"genus": g, "identity": "intersection"}, F.distance(forms.expected_universal_curvature(om)))
        unit = moduli.unitary_family_invariant(g)
        T = forms.trace_curvature(om, univ, unit)
        I = forms.intersection_curvature(om, univ, unit)
        rep.add({"genus": g, "identity": "trace-vs-intersection"}, T.distance(I))
        fz = moduli.frozen_s_invariant(g)
        Z = forms.trace_curvature(om, fz, fz)
        frozen_zero = frozen_zero and Z.is_zero()
        rep.add({"genus": g, "identity": "frozen-trace"}, Z.max_abs())
    rep.constants["frozen_trace_exactly_zero"] = frozen_zero


def check_twistor(task: VerificationTask, rep: VerificationReport) -> None:
    om = validate(task.period())
    g = om.genus
    rng = np.random.default_rng(task.seed)
    lams = task.lambdas or [0.5, 1.0, 2j]
    consts = []
    for k in range(task.grid):
        t, s = uniform_complex(rng, g), uniform_complex(rng, g)
        for lam in lams:
            d = twistor.fiber_decomposition_check(om, twistor.TwistorPoint(t, s, lam))
            rep.add({"point": k, "lambda": lam}, d.max_residual)
            consts.extend(d.constants.values())
    c0 = consts[0]
    spread = max(abs(c - c0) for c in consts)
    rep.add({"identity": "constant-spread"}, spread)
    rep.constants["proportionality"] = c0
    rep.constants["proportionality_spread"] = spread
    if g == 1:
        tau = complex(om.omega[0, 0])
        worst, samples = 0.0, []
        for _ in range(int(task.params.get("residue_points", 5))):
            t, s = uniform_complex(rng, None, -0.25, 0.25), uniform_complex(rng, None, -0.25, 0.25)
            lim, _ = twistor.residue_limit_genus1(tau, complex(t), complex(s))
            expect = twistor.connection_residue(om, [t]).coefficient(["ds1"])
            err = abs(lim - expect) / abs(expect)
            samples.append({"t": t, "s": s, "limit": lim, "expected": expect, "rel_error": err})
            worst = max(worst, err)
        rep.constants["residue_samples"] = samples
        rep.limits.append({"name": "residue_limit", "value": worst, "tol": 1e-4})


DEFAULT_U = (0.1 + 0.05j, 0.3 + 0.2j, -0.2 + 0.35j, 0.45 - 0.1j)


def check_torsion_oracle(task: VerificationTask, rep: VerificationReport) -> None:
    om = validate(task.period())
    if om.genus != 1:
        raise InvalidTask("the spectral oracle is genus one only")
    tau = complex(om.omega[0, 0])
    us = [cplx_from_json(u) for u in task.params["u"]] if "u" in task.params else list(DEFAULT_U)
    us = us[: max(task.grid, 2)] if task.grid >= 2 else us
    splits = (1.0, 0.5, 2.0) if task.slow else (1.0,)
    offsets = {t0: [torsion.spectral_offset_genus1(u, tau, t0) for u in us] for t0 in splits}
    ref = offsets[1.0][0]
    for t0, vals in offsets.items():
        for u, v in zip(us, vals):
            rep.add({"u": u, "t0": t0}, abs(v - ref))
    rep.constants["offset"] = ref


def check_gm_curvature(task: VerificationTask, rep: VerificationReport) -> None:
    S = _surface(task)
    rng = np.random.default_rng(task.seed)
    grid = [(complex(-np.conj(s) + 0.2 * uniform_complex(rng, None)), complex(s)) for s in box_grid(task.grid)]
    out = surface.gm_from_curvature_check(S, grid)
    for (t, s), r, per in zip(out.points, out.residuals, out.periods):
        rep.add({"t": t, "s": s, "periods": per}, r)


CHECK_FUNCS: dict[str, Callable] = {
    "reciprocity": check_reciprocity,
    "reciprocity1": check_reciprocity1,
    "reciprocity2": check_reciprocity2,
    "flatness": check_flatness,
    "curvature": check_curvature,
    "twistor": check_twistor,
    "torsion-oracle": check_torsion_oracle,
    "gm-curvature": check_gm_curvature,
}


def run_task(task) -> VerificationReport:
    """Run one task; errors end up in the report instead of propagating."""
    if isinstance(task, dict):
        try:
            task = VerificationTask.from_json(task)
        except INVALID_INPUT as exc:
            return VerificationReport(task=dict(task), error=f"{type(exc).__name__}: {exc}", status="invalid")
    rep = VerificationReport(task=task.to_json())
    try:
        CHECK_FUNCS[task.check](task, rep)
    except INVALID_INPUT as exc:
        rep.error, rep.status = f"{type(exc).__name__}: {exc}", "invalid"
    except (DelpairError, ValueError, ArithmeticError) as exc:
        rep.error, rep.status = f"{type(exc).__name__}: {exc}", "fail"
    return rep.finish()


def run_suite(tasks: list, workers: int = 1) -> list:
    """Run tasks (optionally on a thread pool); report order follows task order."""
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_task, tasks))
    return [run_task(t) for t in tasks]
