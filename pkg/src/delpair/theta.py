"""Riemann theta functions with characteristics.

The series

    theta[a, b](Z, Omega) = sum_n exp(pi i (n+a)^T Omega (n+a) + 2 pi i (n+a)^T (Z+b))

is summed over the lattice points inside an ellipsoid around the real center
of the Gaussian envelope. The radius is the smallest one whose lattice-tail
bound (Deconinck, Heil, Bobenko, van Hoeij, Schmies, Math. Comp. 73, 2004)
is below the requested tolerance, relative to the returned value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import gamma, gammaincc

from .errors import TruncationRadiusOverflow
from .period import PeriodMatrix, validate

RADIUS_CAP = 200.0
MAX_POINTS = 2_000_000
# Below this multiple of machine epsilon (relative to the sum of moduli) a sum
# is indistinguishable from zero.
_ZERO_FLOOR = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class Characteristic:
    """Rational characteristic ``[alpha, beta]`` with entries in ``[0, 1)``."""

    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have equal length")
        for x in self.alpha + self.beta:
            if not 0 <= x < 1:
                raise ValueError(f"characteristic entry {x} outside [0, 1)")

    @classmethod
    def make(cls, alpha, beta, genus: Optional[int] = None) -> "Characteristic":
        """Build from scalars (broadcast to ``genus``) or sequences."""

        def vec(v):
            if isinstance(v, (int, float, Fraction, str)):
                if genus is None:
                    raise ValueError("genus needed to broadcast a scalar characteristic")
                v = [v] * genus
            return tuple(Fraction(x).limit_denominator(10**6) for x in v)

        return cls(vec(alpha), vec(beta))

    @classmethod
    def zero(cls, genus: int) -> "Characteristic":
        return cls.make(0, 0, genus)

    @classmethod
    def odd_half(cls, genus: int = 1) -> "Characteristic":
        return cls.make(Fraction(1, 2), Fraction(1, 2), genus)

    @property
    def genus(self) -> int:
        return len(self.alpha)

    @property
    def alpha_vec(self) -> np.ndarray:
        return np.array([float(x) for x in self.alpha])

    @property
    def beta_vec(self) -> np.ndarray:
        return np.array([float(x) for x in self.beta])

    def parity(self) -> Optional[int]:
        """+1 / -1 for half-integer characteristics, None otherwise."""
        if any(x.denominator > 2 for x in self.alpha + self.beta):
            return None
        s = sum(int(2 * a) * int(2 * b) for a, b in zip(self.alpha, self.beta))
        return -1 if s % 2 else 1


@dataclass(frozen=True)
class ThetaValue:
    """A theta value stored as ``mantissa * exp(exponent)``.

    ``tail_bound`` bounds the dropped lattice tail in units of
    ``exp(exponent)``; ``gradient`` (if computed) uses the same scaling and
    ``grad_tail_bound`` bounds its componentwise truncation error.
    ``cancellation`` is ``sum |terms| / |sum|`` (``inf`` for a zero value).
    """

    mantissa: complex
    exponent: float
    tail_bound: float
    gradient: Optional[np.ndarray] = None
    grad_tail_bound: float = 0.0
    cancellation: float = 1.0

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def value(self) -> complex:
        return self.mantissa * math.exp(self.exponent) if self.mantissa else 0j

    def grad_value(self) -> np.ndarray:
        if self.gradient is None:
            raise ValueError("gradient was not computed")
        return self.gradient * math.exp(self.exponent)

    def log(self) -> complex:
        """Principal log of the mantissa plus the exponent."""
        if self.is_zero:
            raise ZeroDivisionError("log of a zero theta value")
        return self.exponent + np.log(self.mantissa)

    def log_abs2(self) -> float:
        return 2.0 * (self.exponent + math.log(abs(self.mantissa)))

    def dlog(self) -> np.ndarray:
        """Logarithmic gradient ``grad(theta) / theta``; the scaling cancels."""
        if self.gradient is None:
            raise ValueError("gradient was not computed")
        return self.gradient / self.mantissa


def _tail(R: float, g: int, rho: float, k: int) -> float:
    """Bound on sum_{|v| > R} |v|^k exp(-|v|^2) over a lattice coset with minimum ``rho``."""
    r = R - rho / 2
    if r <= 0:
        return math.inf
    a = (g + k) / 2
    return (g / 2) * (2 / rho) ** g * gamma(a) * gammaincc(a, r * r)


def _radius_for(target: float, g: int, rho: float, k: int, cap: float) -> float:
    lo = 0.5 * (math.sqrt(g + k) + rho) + 1e-9
    if _tail(lo, g, rho, k) <= target:
        return lo
    hi = max(2 * lo, 2.0)
    while _tail(hi, g, rho, k) > target:
        hi *= 1.5
        if hi > 4 * cap:
            raise TruncationRadiusOverflow(
                f"tail target {target:.1e} needs radius beyond cap {cap:g}"
            )
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _tail(mid, g, rho, k) > target:
            lo = mid
        else:
            hi = mid
    if hi > cap:
        raise TruncationRadiusOverflow(f"required radius {hi:.2f} exceeds cap {cap:g}")
    return hi


def ellipsoid_points(U: np.ndarray, center: np.ndarray, R: float) -> np.ndarray:
    """Integer points ``n`` with ``|U (n - center)| <= R`` for upper-triangular ``U``."""
    g = len(center)
    out: list[np.ndarray] = []
    n = np.zeros(g, dtype=np.int64)

    def rec(i: int, rem: float):
        off = float(U[i, i + 1:] @ (n[i + 1:] - center[i + 1:])) if i + 1 < g else 0.0
        half = math.sqrt(max(rem, 0.0)) / U[i, i]
        mid = center[i] - off / U[i, i]
        lo, hi = math.ceil(mid - half), math.floor(mid + half)
        if i == 0:
            if hi >= lo:
                block = np.empty((hi - lo + 1, g), dtype=np.int64)
                block[:] = n
                block[:, 0] = np.arange(lo, hi + 1)
                out.append(block)
            return
        for k in range(lo, hi + 1):
            n[i] = k
            r = U[i, i] * (k - center[i]) + off
            rec(i - 1, rem - r * r)
        n[i] = 0

    rec(g - 1, R * R)
    if not out:
        return np.zeros((0, g), dtype=np.int64)
    pts = np.concatenate(out)
    if len(pts) > MAX_POINTS:
        raise TruncationRadiusOverflow(f"{len(pts)} lattice points exceed limit")
    return pts


@lru_cache(maxsize=256)
def _shortest(key: bytes, g: int) -> float:
    U = np.frombuffer(key, dtype=float).reshape(g, g)
    r0 = min(np.linalg.norm(U[:, i]) for i in range(g))
    pts = ellipsoid_points(U, np.zeros(g), r0 * (1 + 1e-9))
    norms = np.linalg.norm(pts @ U.T, axis=1)
    return float(np.min(norms[norms > 0.5 * 1e-12]))


def _scaled_cholesky(omega: PeriodMatrix) -> np.ndarray:
    return math.sqrt(math.pi) * omega.imag_chol.T


def shortest_vector(omega: PeriodMatrix) -> float:
    """Length of the shortest nonzero vector of ``sqrt(pi) L^T Z^g``."""
    U = np.ascontiguousarray(_scaled_cholesky(omega))
    return _shortest(U.tobytes(), omega.genus)


def _as_vec(z, g: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(z, dtype=complex))
    if v.shape != (g,):
        raise ValueError(f"expected a vector of length {g}, got shape {v.shape}")
    return v


def theta(
    z,
    omega,
    char: Optional[Characteristic] = None,
    tol: float = 1e-12,
    *,
    gradient: bool = False,
    radius_cap: float = RADIUS_CAP,
) -> ThetaValue:
    """Evaluate ``theta[char](z, omega)`` with a certified relative tail bound.

    Parameters
    ----------
    z : complex vector of length g (scalar allowed for g = 1)
    omega : PeriodMatrix or anything :func:`validate` accepts
    char : Characteristic, default zero characteristic
    tol : bound on ``tail_bound`` (relative to the returned value)
    gradient : also sum the term-wise differentiated series

    Raises
    ------
    TruncationRadiusOverflow
        if the required ellipsoid radius exceeds ``radius_cap``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    omega = validate(omega)
    g = omega.genus
    z = _as_vec(z, g)
    if char is None:
        char = Characteristic.zero(g)
    if char.genus != g:
        raise ValueError("characteristic genus does not match period matrix")
    alpha, beta = char.alpha_vec, char.beta_vec

    Y, Yinv = omega.imag, omega.imag_inv
    y = z.imag
    cm = -Yinv @ y  # real center in m = n + alpha coordinates
    e0 = math.pi * float(y @ Yinv @ y)
    U = _scaled_cholesky(omega)
    rho = shortest_vector(omega)
    Uinv_rows = np.linalg.norm(np.linalg.inv(U), axis=1)
    zb = z + beta

    def summed(target: float):
        R = _radius_for(target, g, rho, 0, radius_cap)
        eps = _tail(R, g, rho, 0)
        geps = 0.0
        if gradient:
            R = max(R, 0.5 * (math.sqrt(g + 1) + rho) + 1e-9)
            while True:
                eps = _tail(R, g, rho, 0)
                geps = 2 * math.pi * float(
                    np.max(np.abs(cm) * eps + Uinv_rows * _tail(R, g, rho, 1))
                )
                if geps <= target:
                    break
                R *= 1.05
                if R > radius_cap:
                    raise TruncationRadiusOverflow(
                        f"gradient tail needs radius beyond cap {radius_cap:g}"
                    )
        pts = ellipsoid_points(U, cm - alpha, R)
        m = pts + alpha
        quad = np.einsum("ki,ij,kj->k", m, omega.omega, m)
        expo = 1j * math.pi * quad + 2j * math.pi * (m @ zb) - e0
        terms = np.exp(expo)
        S = terms.sum()
        A = np.abs(terms).sum()
        G = (2j * math.pi * m * terms[:, None]).sum(axis=0) if gradient else None
        return S, A, G, eps, geps

    S, A, G, eps, geps = summed(tol)
    if abs(S) <= _ZERO_FLOOR * A:
        return ThetaValue(0j, e0, float(eps), G, float(geps), math.inf)
    if eps > tol * abs(S) or geps > tol * abs(S):
        S, A, G, eps, geps = summed(0.5 * tol * min(1.0, abs(S)))
        if abs(S) <= _ZERO_FLOOR * A:
            return ThetaValue(0j, e0, float(eps), G, float(geps), math.inf)
    mag = abs(S)
    return ThetaValue(
        mantissa=complex(S / mag),
        exponent=e0 + math.log(mag),
        tail_bound=float(eps / mag),
        gradient=None if G is None else G / mag,
        grad_tail_bound=float(geps / mag),
        cancellation=float(A / mag),
    )


def theta_grad(z, omega, char: Optional[Characteristic] = None, tol: float = 1e-12) -> ThetaValue:
    """Theta together with its Z-gradient.

    The gradient is stored in ``.gradient`` scaled like the mantissa; use
    ``.grad_value()`` for the unscaled vector or ``.dlog()`` for the
    logarithmic gradient.
    """
    return theta(z, omega, char, tol, gradient=True)


def theta_value(z, omega, char: Optional[Characteristic] = None, tol: float = 1e-12) -> complex:
    """Plain complex value; overflows for very large ``Im z``."""
    return theta(z, omega, char, tol).value()


def log_theta_norm(u, omega, tol: float = 1e-12) -> float:
    """``log ||theta||^2(u, Omega)``; ``-inf`` on the theta divisor."""
    omega = validate(omega)
    u = _as_vec(u, omega.genus)
    th = theta(u, omega, None, tol)
    if th.is_zero:
        return -math.inf
    iu = u.imag
    return -2 * math.pi * float(iu @ omega.imag_inv @ iu) + th.log_abs2()


def theta_norm(u, omega, tol: float = 1e-12) -> float:
    """``||theta||^2(u) = exp(-2 pi Im u^T (Im Omega)^{-1} Im u) |theta(u)|^2``."""
    lv = log_theta_norm(u, omega, tol)
    return 0.0 if lv == -math.inf else math.exp(lv)


def direct_sum(z, omega, char: Optional[Characteristic] = None, radius: int = 20) -> complex:
    """Brute-force box sum over ``|n_i| <= radius``; a slow independent oracle."""
    omega = validate(omega)
    g = omega.genus
    z = _as_vec(z, g)
    char = char or Characteristic.zero(g)
    rng = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([rng] * g), indexing="ij")
    m = np.stack([x.ravel() for x in grids], axis=1) + char.alpha_vec
    quad = np.einsum("ki,ij,kj->k", m, omega.omega, m)
    return complex(np.exp(1j * np.pi * quad + 2j * np.pi * (m @ (z + char.beta_vec))).sum())


def parse_characteristic(text: str, genus: int) -> Characteristic:
    """Parse ``"a,b"`` (broadcast) or ``"a1:a2,b1:b2"``; fractions allowed."""
    try:
        a_txt, b_txt = text.split(",")
    except ValueError as exc:
        raise ValueError(f"characteristic must look like 'a,b', got {text!r}") from exc

    def part(s: str) -> Sequence[Fraction] | Fraction:
        items = [Fraction(x.strip()) for x in s.split(":")]
        return items[0] if len(items) == 1 else items

    return Characteristic.make(part(a_txt), part(b_txt), genus)
