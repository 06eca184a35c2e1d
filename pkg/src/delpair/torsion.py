"""Holomorphic analytic torsion in moduli coordinates and its flatness.

All torsion values are logarithms relative to the metric constant ``C(X)``,
which never enters a check: only log-derivatives, differences over the
moduli space and values mod ``2 pi i`` are compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import exp1

from .errors import SingularPrymMatrix, ThetaZeroOnDivisor, TrivialCharacter
from .harness.fd import wirtinger_fd
from .moduli import DeRhamPoint
from .period import PeriodMatrix, validate
from .theta import ThetaValue, log_theta_norm, theta, theta_grad

CANCELLATION_LIMIT = 1e13
Which = Literal["kappa", "unitaryX", "unitaryXbar"]


@dataclass(frozen=True, eq=False)
class TorsionPoint:
    omega: PeriodMatrix
    p: DeRhamPoint

    def __post_init__(self):
        object.__setattr__(self, "omega", validate(self.omega))
        if self.p.genus != self.omega.genus:
            from .errors import GenusMismatch

            raise GenusMismatch("point genus does not match period matrix")

    @classmethod
    def make(cls, omega, t, s) -> "TorsionPoint":
        return cls(validate(omega), DeRhamPoint(t, s))

    def with_coords(self, t, s) -> "TorsionPoint":
        return TorsionPoint(self.omega, DeRhamPoint(t, s))


def _theta_checked(z, omega, grad: bool = False) -> ThetaValue:
    th = theta_grad(z, omega) if grad else theta(z, omega)
    if th.is_zero or th.cancellation > CANCELLATION_LIMIT:
        raise ThetaZeroOnDivisor(f"theta vanishes (to working precision) at {np.round(z, 12)}")
    return th


def _args(pt: TorsionPoint):
    Y = pt.omega.imag
    return Y, Y @ pt.p.s / math.pi, Y @ pt.p.t / math.pi, pt.omega.conj_neg()


def log_T_kappa(pt: TorsionPoint) -> complex:
    """``log T(chi (x) kappa) - log C(X)`` with principal logs of each theta factor."""
    Y, zs, zt, om_bar = _args(pt)
    v = pt.p.t + pt.p.s
    quad = (v @ Y @ v) / (2 * math.pi)
    return complex(quad + _theta_checked(zs, pt.omega).log() + _theta_checked(zt, om_bar).log())


def log_T_unitary_X(pt: TorsionPoint) -> float:
    """``(1/2pi)(s - conj s)^T Y (s - conj s) + log |theta|^2(Y s / pi, Omega)``."""
    Y, zs, _, _ = _args(pt)
    d = pt.p.s - pt.p.s.conj()
    return float(((d @ Y @ d) / (2 * math.pi)).real + _theta_checked(zs, pt.omega).log_abs2())


def log_T_unitary_Xbar(pt: TorsionPoint) -> float:
    """Same as :func:`log_T_unitary_X` in ``t`` with the period matrix ``-conj(Omega)``."""
    Y, _, zt, om_bar = _args(pt)
    d = pt.p.t - pt.p.t.conj()
    return float(((d @ Y @ d) / (2 * math.pi)).real + _theta_checked(zt, om_bar).log_abs2())


_LOGS = {"kappa": log_T_kappa, "unitaryX": log_T_unitary_X, "unitaryXbar": log_T_unitary_Xbar}


def _dlog_analytic(pt: TorsionPoint, which: Which) -> np.ndarray:
    Y, zs, zt, om_bar = _args(pt)
    t, s = pt.p.t, pt.p.s
    g = len(t)
    zero = np.zeros(g, dtype=complex)
    # d/dx_i log theta(Y x / pi) = (1/pi) (Y^T grad theta / theta)_i
    if which == "kappa":
        lin = Y @ (t + s) / math.pi
        dt = lin + Y.T @ _theta_checked(zt, om_bar, True).dlog() / math.pi
        ds = lin + Y.T @ _theta_checked(zs, pt.omega, True).dlog() / math.pi
    elif which == "unitaryX":
        dt = zero
        ds = Y @ (s - s.conj()) / math.pi + Y.T @ _theta_checked(zs, pt.omega, True).dlog() / math.pi
    elif which == "unitaryXbar":
        dt = Y @ (t - t.conj()) / math.pi + Y.T @ _theta_checked(zt, om_bar, True).dlog() / math.pi
        ds = zero
    else:
        raise ValueError(f"unknown torsion {which!r}")
    return np.concatenate([dt, ds])


def _dlog_fd(pt: TorsionPoint, which: Which, h: float) -> np.ndarray:
    fn = _LOGS[which]
    t0, s0 = np.array(pt.p.t), np.array(pt.p.s)
    g = len(t0)
    out = np.zeros(2 * g, dtype=complex)
    for k in range(2 * g):
        base = t0 if k < g else s0
        i = k % g

        def f(w, k=k, i=i):
            v = (t0 if k < g else s0).copy()
            v[i] = w
            tt, ss = (v, s0) if k < g else (t0, v)
            return fn(pt.with_coords(tt, ss))

        out[k] = wirtinger_fd(f, base[i], h, wrap=(which == "kappa"))
    return out


def dlog_torsion(pt: TorsionPoint, which: Which = "kappa", method: str = "analytic", h: float = 1e-5) -> np.ndarray:
    """``(1,0)`` derivative ``(d/dt_1..d/dt_g, d/ds_1..d/ds_g)`` of a log torsion.

    ``analytic`` uses the log-gradient ``grad(theta)/theta``; ``fd`` uses
    central Wirtinger differences with step ``h``.
    """
    if method == "analytic":
        return _dlog_analytic(pt, which)
    if method == "fd":
        return _dlog_fd(pt, which, h)
    raise ValueError(f"unknown method {method!r}")


def flatness_difference(pt: TorsionPoint, method: str = "analytic") -> np.ndarray:
    """``d log T(chi (x) kappa) - d log T_X - d log T_Xbar`` as a covector."""
    return (
        dlog_torsion(pt, "kappa", method)
        - dlog_torsion(pt, "unitaryX", method)
        - dlog_torsion(pt, "unitaryXbar", method)
    )


def flatness_residual(pt: TorsionPoint, method: str = "analytic") -> float:
    """Largest component of :func:`flatness_difference`.

    The identity holds on the unitary locus ``t = -conj(s)``; off it the
    residual is ``(1/pi) Y (t + conj s)`` on ``ds`` and ``(1/pi) Y (s + conj t)``
    on ``dt``, which makes off-locus points useful negative controls.
    """
    return float(np.max(np.abs(flatness_difference(pt, method))))


def unitary_point(omega, s) -> TorsionPoint:
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    return TorsionPoint.make(omega, -s.conj(), s)


# character coordinates ---------------------------------------------------------------


def log_holo_torsion_ab(a, b, omega) -> complex:
    """Log of ``exp(-2 pi a^T Y a) theta(b - Omega a, Omega) theta(b - conj(Omega) a, -conj(Omega))``."""
    omega = validate(omega)
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    Y = omega.imag
    z1 = b - omega.omega.T @ a
    z2 = b - omega.omega.conj().T @ a
    t1 = _theta_checked(z1, omega)
    t2 = _theta_checked(z2, omega.conj_neg())
    return complex(-2 * math.pi * (a @ Y @ a) + t1.log() + t2.log())


def holo_torsion_ab(a, b, omega) -> complex:
    """Holomorphic torsion of ``chi (x) kappa`` in holonomy exponents, up to ``C(X)``."""
    return complex(np.exp(log_holo_torsion_ab(a, b, omega)))


@dataclass(frozen=True, eq=False)
class PrymData:
    """Values entering the torsion formula with Prym differentials.

    Parameters
    ----------
    omega_p : (g, g) array
        ``omega_i(p_j)``, ``j = 1..g``.
    eta_p : (g-1, g-1) array
        ``eta_i(p_j, chi)``.
    eta_pbar : (g-1, g-1) array
        ``eta_i(conj p_j, chi^{-1})``.
    pairing : (g-1, g-1) array
        ``(eta_i(chi), eta_j(chi^{-1}))``.
    u0 : (g,) array
        ``kappa - sum_{i<g} p_i`` in Jacobian coordinates.
    """

    omega_p: np.ndarray
    eta_p: np.ndarray
    eta_pbar: np.ndarray
    pairing: np.ndarray
    u0: np.ndarray

    def __post_init__(self):
        for name in ("omega_p", "eta_p", "eta_pbar", "pairing", "u0"):
            v = np.array(getattr(self, name), dtype=complex, ndmin=1 if name == "u0" else 2)
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        g = len(self.u0)
        if g < 2:
            raise ValueError("Prym data needs genus >= 2")
        if self.omega_p.shape != (g, g):
            raise ValueError("omega_p must be g x g")
        for name in ("eta_p", "eta_pbar", "pairing"):
            if getattr(self, name).shape != (g - 1, g - 1):
                raise ValueError(f"{name} must be (g-1) x (g-1)")

    @property
    def genus(self) -> int:
        return len(self.u0)

    def theta_derivative_term(self, omega) -> complex:
        """``sum_i d_{Z_i} theta(u0, Omega) omega_i(p_g)``."""
        th = theta_grad(self.u0, omega)
        return complex(th.grad_value() @ self.omega_p[:, -1])

    def scaled(self, k: complex) -> "PrymData":
        """Rescale every Prym differential by ``k``."""
        return PrymData(self.omega_p, k * self.eta_p, k * self.eta_pbar, k * k * self.pairing, self.u0)


def _det(name: str, M: np.ndarray, tol: float = 1e-12) -> complex:
    if np.linalg.cond(M) > 1 / tol:
        raise SingularPrymMatrix(f"{name} is singular")
    return complex(np.linalg.det(M))


def general_torsion_from_prym(pd: PrymData, a, b, omega) -> complex:
    """Holomorphic torsion ``T(chi)`` from supplied Prym data, up to ``C(X)``.

    The second theta factor is evaluated at ``b - conj(Omega) a + conj(u0)``,
    the sign that makes the expression a squared modulus on unitary
    characters.
    """
    omega = validate(omega)
    g = omega.genus
    if pd.genus != g:
        from .errors import GenusMismatch

        raise GenusMismatch("Prym data genus does not match period matrix")
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    Y = omega.imag
    u0 = pd.u0
    pref = 4 * math.pi**2 * abs(np.linalg.det(pd.omega_p)) ** 2
    expo = np.exp(4 * math.pi * (u0.imag @ a) - 2 * math.pi * (a @ Y @ a))
    ratio = _det("pairing", pd.pairing) / (_det("eta_p", pd.eta_p) * _det("eta_pbar", pd.eta_pbar))
    d = pd.theta_derivative_term(omega)
    if abs(d) == 0:
        raise SingularPrymMatrix("theta derivative term vanishes")
    th1 = theta(b - omega.omega.T @ a + u0, omega).value()
    th2 = theta(b - omega.omega.conj().T @ a + u0.conj(), omega.conj_neg()).value()
    return complex(pref * expo * ratio * th1 * th2 / abs(d) ** 2)


def conjugate_symmetric_prym(g: int, rng: np.random.Generator, scale: float = 0.3) -> PrymData:
    """Random Prym data obeying ``eta(conj z, chi^{-1}) = conj(eta(z, chi))`` with a positive pairing."""
    n = g - 1
    shape = (n, n)
    eta = rng.normal(size=shape) + 1j * rng.normal(size=shape) + 2 * np.eye(n)
    A = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    pairing = A @ A.conj().T + n * np.eye(n)
    omega_p = rng.normal(size=(g, g)) + 1j * rng.normal(size=(g, g)) + 2 * np.eye(g)
    u0 = scale * (rng.normal(size=g) + 1j * rng.normal(size=g))
    return PrymData(omega_p, eta, eta.conj(), pairing, u0)


# genus-one spectral oracle -------------------------------------------------------


def _character_vector(w: complex, tau: complex) -> tuple[float, float]:
    """Real exponents ``(a, b)`` with ``w = b - a tau``."""
    a = -w.imag / tau.imag
    return a, w.real + a * tau.real


def spectral_log_det_genus1(u, tau, t0: float = 1.0, cutoff: float = 45.0) -> float:
    """Zeta-regularized ``log det`` of the flat Laplacian on the character twisted by ``u``.

    The twist is the unitary character of ``w = u + kappa`` with
    ``kappa = (1 + tau)/2``, so that ``log det - log ||theta||^2(u)`` is
    independent of ``u``. Eigenvalues are ``4 pi^2 |xi|^2`` with ``xi`` in
    the dual lattice shifted by ``xi0 = i w / Im tau``. ``zeta'(0)`` is split
    at heat time ``t0``: incomplete-gamma terms ``E1(mu t0)`` above it, the
    Poisson-dual sum below it.

    Raises
    ------
    TrivialCharacter
        if ``w`` lies in the lattice (a harmonic zero mode).
    """
    tau = complex(validate(tau).omega[0, 0])
    u = complex(np.ravel([u])[0])
    w = u + 0.5 * (1 + tau)
    a, b = _character_vector(w, tau)
    if abs(a - round(a)) < 1e-12 and abs(b - round(b)) < 1e-12:
        raise TrivialCharacter("character is trivial: the Laplacian has a zero mode")
    t1, t2 = tau.real, tau.imag
    area = t2
    xi0 = 1j * w / t2

    # spectral side: xi = xi0 + i (m + n tau) / t2
    rmax = math.sqrt(cutoff / t0) / (2 * math.pi)
    R = int(math.ceil(rmax * t2 / min(1.0, t2))) + 2 + int(abs(w)) + 2
    m, n = np.meshgrid(np.arange(-R, R + 1), np.arange(-R - 2, R + 3), indexing="ij")
    xi = xi0 + 1j * (m + n * tau) / t2
    mu = 4 * math.pi**2 * np.abs(xi) ** 2
    mu = mu[mu * t0 < cutoff + 40]
    large = float(np.sum(exp1(mu * t0)))

    # Poisson side: gamma = m + n tau, chi(gamma) = exp(2 pi i (a m + b n))
    G = int(math.ceil(math.sqrt(4 * t0 * (cutoff + 40)) / min(1.0, t2))) + 2
    m, n = np.meshgrid(np.arange(-G, G + 1), np.arange(-G, G + 1), indexing="ij")
    m, n = m.ravel(), n.ravel()
    keep = (m != 0) | (n != 0)
    m, n = m[keep], n[keep]
    g2 = np.abs(m + n * tau) ** 2
    chi = np.cos(2 * math.pi * (a * m + b * n))
    small = -area / (4 * math.pi * t0) + (area / math.pi) * float(np.sum(chi * np.exp(-g2 / (4 * t0)) / g2))
    return -(large + small)


spectral_det_genus1 = spectral_log_det_genus1


def spectral_offset_genus1(u, tau, t0: float = 1.0) -> float:
    """``log det - log ||theta||^2(u)``; constant in ``u`` up to quadrature error."""
    return spectral_log_det_genus1(u, tau, t0) - log_theta_norm(u, tau)


def theta_zero_genus1(tau, guess=None) -> complex:
    """Zero of ``theta(z, tau)`` near ``guess`` (default the half period ``(1 + tau)/2``) by Newton."""
    tau = complex(tau)
    z = 0.5 * (1 + tau) + 0.05 if guess is None else complex(guess)
    for _ in range(50):
        th = theta_grad(z, tau, tol=1e-15)
        v, dv = th.value(), th.grad_value()[0]
        step = v / dv
        z -= step
        if abs(step) < 1e-15:
            break
    return z
