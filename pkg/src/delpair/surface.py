"""Genus-one model of the universal family: prime form, sections and reciprocity.

The curve is ``C / (Z + tau Z)`` with ``alpha = [0, 1]``, ``beta = [0, tau]``
and ``omega = dz``. Lifts of points live in the parallelogram
``P = {x + y tau : 0 <= x, y < 1}``. Integrals ``int_sigma^z`` run along the
straight segment from ``sigma`` to the recorded lift ``z`` in the universal
cover, so ``int omega = z - sigma`` and ``int conj(omega) = conj(z - sigma)``.

A section over the deRham point ``(t, s)`` has its first zero ``p[0]``
attached to the Jacobian coordinate ``u(s) = -(Im tau / pi) s``; the other
points are held fixed when ``s`` moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import DivisorCollision, PoleAtEvaluationPoint
from .harness.fd import wirtinger_fd, wrap_phase
from .moduli import DeRhamPoint, betti_of_deRham
from .period import validate

TWO_PI_I = 2j * math.pi
COLLISION_TOL = 1e-6
POLE_TOL = 1e-12
DATA_TOL = 1e-10


# genus-one theta with the odd characteristic ---------------------------------------


@lru_cache(maxsize=64)
def _terms(tau: complex):
    y = tau.imag
    N = int(math.ceil(math.sqrt(60.0 / (math.pi * y)))) + 3
    k = np.arange(-N, N + 1) + 0.5
    return k, np.exp(1j * math.pi * tau * k * k)


def _reduce(x, tau: complex):
    """Split ``x = x0 + j + k tau`` with ``x0`` in the centered parallelogram."""
    x = np.asarray(x, dtype=complex)
    k = np.round(x.imag / tau.imag)
    r = x - k * tau
    j = np.round(r.real)
    return r - j, j, k


def log_theta11(x, tau: complex, derivative: bool = False):
    """``log theta[1/2, 1/2](x, tau)`` (branch unspecified) and optionally ``theta'/theta``.

    Vectorized over ``x``. Large arguments are pulled back with the
    quasi-periodicity ``theta(x + j + k tau) = (-1)^(j+k) exp(-pi i k^2 tau
    - 2 pi i k x) theta(x)``.
    """
    tau = complex(tau)
    x0, j, k = _reduce(x, tau)
    kk, q = _terms(tau)
    ph = np.exp(TWO_PI_I * np.multiply.outer(x0 + 0.5, kk))
    th = (ph * q).sum(axis=-1)
    with np.errstate(divide="ignore"):
        lg = np.log(th) + 1j * math.pi * (j + k) - 1j * math.pi * k * k * tau - TWO_PI_I * k * x0
    if not derivative:
        return lg
    dth = (ph * q * (TWO_PI_I * kk)).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return lg, dth / th - TWO_PI_I * k


def theta11(x, tau: complex):
    return np.exp(log_theta11(x, tau))


@lru_cache(maxsize=64)
def theta11_prime0(tau: complex) -> complex:
    """``theta'[1/2, 1/2](0, tau)``."""
    kk, q = _terms(complex(tau))
    return complex((q * TWO_PI_I * kk * np.exp(1j * math.pi * kk)).sum())


def prime_form(z, w, tau: complex):
    """``E(z, w) = theta[1/2,1/2](w - z) / theta'[1/2,1/2](0)``."""
    d = np.asarray(w) - np.asarray(z)
    # the odd theta vanishes on the diagonal; the series leaves ~1e-17 there
    return np.where(d == 0, 0j, theta11(d, tau) / theta11_prime0(complex(tau)))


def log_prime_form(z, w, tau: complex):
    return log_theta11(np.asarray(w) - np.asarray(z), tau) - np.log(theta11_prime0(complex(tau)))


def dlog_theta11(x, tau: complex):
    """``theta'/theta`` of the odd theta, vectorized."""
    return log_theta11(x, tau, derivative=True)[1]


# curve and divisor data -----------------------------------------------------------


@dataclass(frozen=True)
class EllipticSurface:
    tau: complex
    sigma: complex = None

    def __post_init__(self):
        tau = complex(validate(self.tau).omega[0, 0])
        object.__setattr__(self, "tau", tau)
        if self.sigma is None:
            object.__setattr__(self, "sigma", 0.1 + 0.1 * tau)
        else:
            object.__setattr__(self, "sigma", complex(self.sigma))

    def coords(self, z):
        """Real lattice coordinates ``(x, y)`` with ``z = x + y tau``."""
        z = np.asarray(z, dtype=complex)
        y = z.imag / self.tau.imag
        return z.real - y * self.tau.real, y

    def canonical(self, z):
        """Lift in ``P`` and the integer shift removed: ``z = lift + m + n tau``."""
        x, y = self.coords(z)
        m, n = np.floor(x), np.floor(y)
        return np.asarray(z) - m - n * self.tau, m.astype(int), n.astype(int)

    def lattice_distance(self, a, b) -> float:
        x, y = self.coords(np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex))
        x, y = x - np.round(x), y - np.round(y)
        return float(np.min(np.abs(x + y * self.tau), initial=math.inf))

    def du_ds(self) -> float:
        return -self.tau.imag / math.pi

    def u_of_s(self, s) -> complex:
        return self.du_ds() * complex(s)

    @property
    def omega_periods(self) -> tuple[complex, complex]:
        return 1.0 + 0j, self.tau


def _arr(v) -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=complex)).copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SectionData:
    """Divisor ``sum p_i - sum q_i`` of a section over the deRham point ``(t, s)``.

    The lifts satisfy ``sum (p_i - q_i) = u(s) + m + n tau``.
    """

    p: np.ndarray
    q: np.ndarray
    m: int
    n: int
    t: complex
    s: complex

    def __post_init__(self):
        object.__setattr__(self, "p", _arr(self.p) if len(np.atleast_1d(self.p)) else _arr([]))
        object.__setattr__(self, "q", _arr(self.q) if len(np.atleast_1d(self.q)) else _arr([]))
        if self.p.shape != self.q.shape:
            raise ValueError("a section divisor needs as many zeros as poles")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "t", complex(np.ravel([self.t])[0]))
        object.__setattr__(self, "s", complex(np.ravel([self.s])[0]))

    @classmethod
    def trivial(cls) -> "SectionData":
        return cls([], [], 0, 0, 0, 0)

    @classmethod
    def build(cls, S: EllipticSurface, q, t, s, p_rest=()) -> "SectionData":
        """Solve the divisor equation for ``p[0]`` and canonicalize it into ``P``."""
        q = np.atleast_1d(np.asarray(q, dtype=complex))
        p_rest = np.atleast_1d(np.asarray(p_rest, dtype=complex))
        if len(p_rest) != len(q) - 1:
            raise ValueError("need len(q) - 1 fixed zeros")
        raw = S.u_of_s(s) + q.sum() - p_rest.sum()
        p0, m, n = S.canonical(raw)
        return cls(np.concatenate([[p0], p_rest]), q, -int(m), -int(n), t, s)

    @property
    def point(self) -> DeRhamPoint:
        return DeRhamPoint([self.t], [self.s])

    def divisor_residual(self, S: EllipticSurface) -> float:
        lhs = (self.p - self.q).sum()
        return abs(lhs - S.u_of_s(self.s) - self.m - self.n * S.tau)

    def check(self, S: EllipticSurface) -> None:
        if self.divisor_residual(S) > DATA_TOL * max(1.0, abs(self.s)):
            raise ValueError("section data violates the divisor equation")

    def moved(self, S: EllipticSurface, t, s) -> "SectionData":
        """Same data over ``(t, s)``: ``p[0]`` follows ``u(s)``, lifts are not re-canonicalized."""
        if not len(self.p):
            return replace(self, t=complex(t), s=complex(s), p=self.p)
        dp = S.u_of_s(s) - S.u_of_s(self.s)
        p = np.array(self.p)
        p[0] += dp
        return SectionData(p, self.q, self.m, self.n, t, s)

    def times(self, f: "FunctionData") -> "SectionData":
        """Divisor data of ``f * l``."""
        return SectionData(
            np.concatenate([self.p, f.x]),
            np.concatenate([self.q, f.y]),
            self.m + f.mt,
            self.n + f.nt,
            self.t,
            self.s,
        )

    def to_json(self) -> dict:
        from .jsonio import array_to_json, cplx_to_json

        return {
            "p": array_to_json(self.p),
            "q": array_to_json(self.q),
            "m": self.m,
            "n": self.n,
            "t": cplx_to_json(self.t),
            "s": cplx_to_json(self.s),
        }


@dataclass(frozen=True, eq=False)
class FunctionData:
    """Divisor ``sum x_i - sum y_i`` of an elliptic function with ``sum (x_i - y_i) = mt + nt tau``."""

    x: np.ndarray
    y: np.ndarray
    mt: int
    nt: int

    def __post_init__(self):
        object.__setattr__(self, "x", _arr(self.x) if len(np.atleast_1d(self.x)) else _arr([]))
        object.__setattr__(self, "y", _arr(self.y) if len(np.atleast_1d(self.y)) else _arr([]))
        if self.x.shape != self.y.shape:
            raise ValueError("an elliptic function has as many zeros as poles")
        object.__setattr__(self, "mt", int(self.mt))
        object.__setattr__(self, "nt", int(self.nt))

    @classmethod
    def trivial(cls) -> "FunctionData":
        return cls([], [], 0, 0)

    def check(self, S: EllipticSurface) -> None:
        r = abs((self.x - self.y).sum() - self.mt - self.nt * S.tau)
        if r > DATA_TOL:
            raise ValueError(f"function data violates the lattice equation (residual {r:.2e})")

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @property
    def orders(self) -> np.ndarray:
        return np.concatenate([np.ones(len(self.x)), -np.ones(len(self.y))])

    def to_json(self) -> dict:
        from .jsonio import array_to_json

        return {"x": array_to_json(self.x), "y": array_to_json(self.y), "mt": self.mt, "nt": self.nt}


def random_function_data(S: EllipticSurface, rng: np.random.Generator, margin: float = 0.05) -> FunctionData:
    """Two zeros and two poles with lifts in ``P``, kept ``margin`` away from its sides."""
    while True:
        c = rng.uniform(margin, 1 - margin, size=(3, 2))
        x1, x2, y1 = c[:, 0] + c[:, 1] * S.tau
        w, mt, nt = S.canonical(x1 + x2 - y1)
        cx, cy = S.coords(w)
        if min(cx, cy, 1 - cx, 1 - cy) < margin:
            continue
        pts = [x1, x2, y1, w]
        if min(S.lattice_distance(a, b) for i, a in enumerate(pts) for b in pts[i + 1:]) < 0.05:
            continue
        if min(S.lattice_distance(a, S.sigma) for a in pts) < 0.05:
            continue
        return FunctionData([x1, x2], [y1, w], mt, nt)


def random_section_data(
    S: EllipticSurface, rng: np.random.Generator, t, s, n_fixed: int = 1, margin: float = 0.05
) -> SectionData:
    c = rng.uniform(margin, 1 - margin, size=(2 * n_fixed + 1, 2))
    pts = c[:, 0] + c[:, 1] * S.tau
    return SectionData.build(S, pts[: n_fixed + 1], t, s, pts[n_fixed + 1:])


# evaluation ----------------------------------------------------------------------


def _check_poles(S, z, poles):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    for y in poles:
        if len(z) and S.lattice_distance(z, y) < POLE_TOL:
            raise PoleAtEvaluationPoint(f"evaluation point hits a pole at {complex(y)}")


def log_section(S: EllipticSurface, d: SectionData, z):
    """``log l(z)``; the branch is continuous in the data but otherwise unspecified."""
    _check_poles(S, z, d.q)
    z = np.asarray(z, dtype=complex)
    out = (d.t + d.s - TWO_PI_I * d.n) * (z - S.sigma)
    for pi in d.p:
        out = out + log_prime_form(z, pi, S.tau)
    for qi in d.q:
        out = out - log_prime_form(z, qi, S.tau)
    return out


def section_value(S: EllipticSurface, d: SectionData, z):
    """``l(z) = prod E(z, p_i) / prod E(z, q_i) * exp((t + s - 2 pi i n)(z - sigma))``."""
    return np.exp(log_section(S, d, z))


def section_multipliers(S: EllipticSurface, d: SectionData, z) -> tuple[complex, complex]:
    """Logs of ``l(z+1)/l(z)`` and ``l(z+tau)/l(z)`` (defined mod ``2 pi i``)."""
    l0 = log_section(S, d, z)
    return complex(log_section(S, d, z + 1) - l0), complex(log_section(S, d, z + S.tau) - l0)


def log_function(S: EllipticSurface, f: FunctionData, z):
    _check_poles(S, z, f.y)
    z = np.asarray(z, dtype=complex)
    out = -TWO_PI_I * f.nt * (z - S.sigma) + 0j
    for xi in f.x:
        out = out + log_prime_form(z, xi, S.tau)
    for yi in f.y:
        out = out - log_prime_form(z, yi, S.tau)
    return out


def function_value(S: EllipticSurface, f: FunctionData, z):
    """``f(z) = prod E(z, x_i) / prod E(z, y_i) * exp(-2 pi i nt (z - sigma))``."""
    return np.exp(log_function(S, f, z))


def dlogf(S: EllipticSurface, f: FunctionData, z):
    """``f'(z) / f(z)``."""
    _check_poles(S, z, f.y)
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, -TWO_PI_I * f.nt, dtype=complex)
    # d/dz log theta(w - z) = -theta'/theta(w - z)
    for xi in f.x:
        out = out - dlog_theta11(xi - z, S.tau)
    for yi in f.y:
        out = out + dlog_theta11(yi - z, S.tau)
    return out


def connection_form(S: EllipticSurface, d: SectionData, z) -> np.ndarray:
    """``(dt, ds)`` components of ``nabla l / l`` at the lift ``z``.

    ``d log l - int_sigma^z nabla_GM nu`` with ``int nabla_GM nu = (z - sigma) dt
    + conj(z - sigma) ds``; ``d log l / dt = z - sigma`` and the ``s``-derivative
    comes from the moving zero ``p[0]``.
    """
    _check_poles(S, z, d.q)
    z = complex(z)
    dlog_ds = z - S.sigma
    if len(d.p):
        if S.lattice_distance(z, d.p[0]) < POLE_TOL:
            raise PoleAtEvaluationPoint("connection form is singular on the moving zero")
        dlog_ds += complex(dlog_theta11(d.p[0] - z, S.tau)) * S.du_ds()
    dlog_dt = z - S.sigma
    return np.array([dlog_dt - (z - S.sigma), dlog_ds - np.conj(z - S.sigma)])


def connection_form_fd(S: EllipticSurface, d: SectionData, z, h: float = 1e-5) -> np.ndarray:
    """Oracle for :func:`connection_form` via Wirtinger differences in ``(t, s)``."""
    z = complex(z)
    at = wirtinger_fd(lambda t: log_section(S, d.moved(S, t, d.s), z), d.t, h, wrap=True)
    as_ = wirtinger_fd(lambda s: log_section(S, d.moved(S, d.t, s), z), d.s, h, wrap=True)
    return np.array([at - (z - S.sigma), as_ - np.conj(z - S.sigma)])


def divisor_trace(orders, values) -> np.ndarray:
    """``sum_j ord_j * values_j`` over a divisor."""
    return np.tensordot(np.asarray(orders, dtype=float), np.asarray(values), axes=1)


def _check_disjoint(S: EllipticSurface, groups: list) -> None:
    pts = [(gi, complex(p)) for gi, grp in enumerate(groups) for p in grp]
    for i, (gi, a) in enumerate(pts):
        if S.lattice_distance(a, S.sigma) < COLLISION_TOL:
            raise DivisorCollision(f"divisor point {a} collides with the base point")
        for gj, b in pts[i + 1:]:
            if S.lattice_distance(a, b) < COLLISION_TOL:
                raise DivisorCollision(f"divisor points {a} and {b} collide")


def weil_residual(S: EllipticSurface, ell: SectionData, f: FunctionData) -> np.ndarray:
    """``tr_{Div f}(nabla l / l) - tr_{Div l}(df / f)`` as a ``(dt, ds)`` covector."""
    _check_disjoint(S, [ell.p, ell.q, f.x, f.y])
    ell.check(S)
    f.check(S)
    left = np.zeros(2, dtype=complex)
    for o, pt in zip(f.orders, f.points):
        left += o * connection_form(S, ell, pt)
    right = np.zeros(2, dtype=complex)
    if len(ell.p):
        right[1] = complex(dlogf(S, f, ell.p[0])) * S.du_ds()
    return left - right


# Weil reciprocity ----------------------------------------------------------------


def dlogf_periods(f: FunctionData) -> tuple[complex, complex]:
    """Periods of ``df/f`` over ``alpha`` and ``beta`` for lifts in ``P``."""
    return -TWO_PI_I * f.nt, TWO_PI_I * f.mt


def _gauss_path(fn, a: complex, b: complex, panels: int = 64, order: int = 16) -> complex:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    r = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return complex(np.sum(wt * fn(a + r * (b - a))) * (b - a))


def dlogf_periods_quad(S: EllipticSurface, f: FunctionData, panels: int = 64) -> tuple[complex, complex]:
    """Quadrature of ``df/f`` along the sides ``[0, 1]`` and ``[0, tau]`` of ``P``."""
    fn = lambda z: dlogf(S, f, z)
    return _gauss_path(fn, 0, 1, panels), _gauss_path(fn, 0, S.tau, panels)


def contour_residue(S: EllipticSurface, f: FunctionData, center: complex, radius: float = 1e-2, n: int = 256) -> complex:
    """``oint df/f`` on a small circle (trapezoid rule)."""
    th = 2 * math.pi * np.arange(n) / n
    z = center + radius * np.exp(1j * th)
    dz = 1j * radius * np.exp(1j * th) * (2 * math.pi / n)
    return complex(np.sum(dlogf(S, f, z) * dz))


def reciprocity_I(S: EllipticSurface, cls: str, f: FunctionData) -> complex:
    """Residual of the first reciprocity law for ``omega`` (``cls="omega"``) or ``conj(omega)``."""
    f.check(S)
    _check_disjoint(S, [f.x, f.y])
    if cls not in ("omega", "omegabar"):
        raise ValueError("cls must be 'omega' or 'omegabar'")
    pa, pb = S.omega_periods
    paths = f.points - S.sigma
    if cls == "omegabar":
        pa, pb, paths = np.conj(pa), np.conj(pb), np.conj(paths)
    fa, fb = dlogf_periods(f)
    lhs = TWO_PI_I * divisor_trace(f.orders, paths)
    rhs = pa * fb - fa * pb
    return complex(lhs - rhs)


def reduce_mod_2pi_i(v: complex) -> complex:
    """Representative of ``v`` mod ``2 pi i Z`` with imaginary part in ``(-pi, pi]``."""
    return complex(wrap_phase(v))


def reciprocity_II(S: EllipticSurface, f: FunctionData, g: FunctionData) -> complex:
    """Residual of the second reciprocity law, divided by ``2 pi i`` and reduced mod ``2 pi i``.

    Both sides are known only mod ``(2 pi i)^2 Z`` because of the logarithms,
    so ``(LHS - RHS) / (2 pi i)`` is meaningful mod ``2 pi i``.
    """
    f.check(S)
    g.check(S)
    _check_disjoint(S, [f.x, f.y, g.x, g.y])
    lhs = divisor_trace(g.orders, log_function(S, f, g.points)) if len(g.x) else 0j
    lhs = lhs - (divisor_trace(f.orders, log_function(S, g, f.points)) if len(f.x) else 0j)
    lhs = TWO_PI_I * lhs
    fa, fb = dlogf_periods(f)
    ga, gb = dlogf_periods(g)
    rhs = fa * gb - ga * fb
    return reduce_mod_2pi_i((lhs - rhs) / TWO_PI_I)


def betti_multiplier_residual(S: EllipticSurface, d: SectionData, z) -> float:
    """Distance mod ``2 pi i`` between section multipliers and the holonomy exponents."""
    la, lb = section_multipliers(S, d, z)
    chi = betti_of_deRham(d.point, S.tau)
    ea, eb = TWO_PI_I * chi.a[0], TWO_PI_I * chi.b[0]
    return max(abs(reduce_mod_2pi_i(la - ea)), abs(reduce_mod_2pi_i(lb - eb)))


# curvature of the universal connection ----------------------------------------------


@dataclass
class GMCurvatureReport:
    points: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    periods: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def _fiber_contraction(S: EllipticSurface, d: SectionData, which: str, z, h: float):
    """``(dz, dz-bar)`` coefficients of ``iota_{d which} F`` at ``z`` by nested differences."""
    t0, s0 = d.t, d.s

    def L(z_, t, s):
        return log_section(S, d.moved(S, t, s), z_)

    def gm(z_):
        return (z_ - S.sigma) if which == "t" else np.conj(z_ - S.sigma)

    def move(v):
        return (v, s0) if which == "t" else (t0, v)

    base = t0 if which == "t" else s0

    def A_mod(z_):
        return wirtinger_fd(lambda v: L(z_, *move(v)), base, h, wrap=True) - gm(z_)

    def A_z(v, conj=False):
        t, s = move(v)
        return wirtinger_fd(lambda w: L(w, t, s), z, h, wrap=True, conjugate=conj)

    # F(d_v, d_w) = d_v A_w - d_w A_v
    cz = wirtinger_fd(lambda v: A_z(v), base, h) - wirtinger_fd(A_mod, z, h)
    czb = wirtinger_fd(lambda v: A_z(v, True), base, h) - wirtinger_fd(A_mod, z, h, conjugate=True)
    return cz, czb


def gm_from_curvature_check(
    S: EllipticSurface,
    grid: list,
    *,
    q=0.45 + 0.55j,
    z0=None,
    h: float = 1e-4,
    nodes: int = 12,
) -> GMCurvatureReport:
    """Periods of the fiber restrictions of ``iota_{dt} F`` and ``iota_{ds} F``.

    ``F`` is obtained by differentiating the universal connection form
    numerically. Expected periods: ``(1, tau)`` for ``dt`` (class of
    ``omega``) and ``(1, conj(tau))`` for ``ds`` (class of ``conj(omega)``).
    Returns the largest deviation per grid point.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    r, wt = 0.5 * (x + 1), 0.5 * w
    rep = GMCurvatureReport()
    for t, s in grid:
        d = SectionData.build(S, [q], t, s)
        start = z0 if z0 is not None else _safe_start(S, d)
        got = {}
        for which, expect in (("t", (1.0, S.tau)), ("s", (1.0, np.conj(S.tau)))):
            per = []
            for v in (1.0, S.tau):
                acc = 0j
                for ri, wi in zip(r, wt):
                    cz, czb = _fiber_contraction(S, d, which, start + ri * v, h)
                    acc += wi * (cz * v + czb * np.conj(v))
                per.append(complex(acc))
            got[which] = (per, expect)
        res = max(abs(p - e) for per, ex in got.values() for p, e in zip(per, ex))
        rep.points.append((complex(t), complex(s)))
        rep.residuals.append(float(res))
        rep.periods.append({k: v[0] for k, v in got.items()})
    return rep


def _safe_start(S: EllipticSurface, d: SectionData) -> complex:
    """Corner for the cycle paths keeping them away from the divisor."""
    pts = list(d.p) + list(d.q)
    best, best_d = None, -1.0
    for a in np.linspace(0.05, 0.95, 10):
        for b in np.linspace(0.05, 0.95, 10):
            z0 = a + b * S.tau
            path = np.concatenate([z0 + np.linspace(0, 1, 41), z0 + np.linspace(0, 1, 41) * S.tau])
            dist = min(S.lattice_distance(path, p) for p in pts) if pts else 1.0
            if dist > best_d:
                best, best_d = z0, dist
    return best


def dlog_section_dz(S: EllipticSurface, d: SectionData, z):
    """``d log l / dz`` without evaluating ``l`` (safe for large moduli)."""
    _check_poles(S, z, d.q)
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, d.t + d.s - TWO_PI_I * d.n, dtype=complex)
    for pi in d.p:
        out = out - dlog_theta11(pi - z, S.tau)
    for qi in d.q:
        out = out + dlog_theta11(qi - z, S.tau)
    return out


def trace_connection_on_section(S: EllipticSurface, ell: SectionData, m: SectionData) -> np.ndarray:
    """``tr_{Div m}(nabla l / l)`` as a ``(dt, ds)`` covector for two sections over the same point.

    Both divisors move with ``s`` through their first zero; the pull-back of
    the fiber component ``d log l / dz`` along the moving zero contributes
    ``(d log l / dz)(p[0]) du/ds``.
    """
    _check_disjoint(S, [ell.p, ell.q, m.p, m.q])
    out = np.zeros(2, dtype=complex)
    for o, pt in zip(np.concatenate([np.ones(len(m.p)), -np.ones(len(m.q))]), np.concatenate([m.p, m.q])):
        out += o * connection_form(S, ell, pt)
    if len(m.p):
        out[1] += complex(dlog_section_dz(S, ell, m.p[0])) * S.du_ds()
    return out
