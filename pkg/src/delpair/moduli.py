"""Coordinates on the deRham, Betti and Jacobian moduli of rank-one local systems.

A deRham point ``(t, s)`` stands for the harmonic form
``nu = sum_i t_i omega_i + s_i conj(omega_i)``. Characters are kept as
exponents ``(a, b)`` with ``chi(alpha_j) = exp(2 pi i a_j)`` and
``chi(beta_j) = exp(2 pi i b_j)``; identities between characters are checked
modulo integers on the exponents, never on exponentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GenusMismatch
from .jsonio import array_from_json, array_to_json
from .period import PeriodMatrix, validate

TWO_PI_I = 2j * math.pi


def _vec(v) -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=complex)).copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DeRhamPoint:
    t: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _vec(self.t))
        object.__setattr__(self, "s", _vec(self.s))
        if self.t.shape != self.s.shape or self.t.ndim != 1:
            raise GenusMismatch("t and s must be vectors of equal length")
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.s))):
            raise ValueError("moduli coordinates must be finite")

    @property
    def genus(self) -> int:
        return len(self.t)

    def __add__(self, other: "DeRhamPoint") -> "DeRhamPoint":
        return DeRhamPoint(self.t + other.t, self.s + other.s)

    def is_unitary(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.t + self.s.conj()), initial=0.0) <= tol)

    def to_json(self) -> dict:
        return {"genus": self.genus, "t": array_to_json(self.t), "s": array_to_json(self.s)}

    @classmethod
    def from_json(cls, d: dict) -> "DeRhamPoint":
        p = cls(np.atleast_1d(array_from_json(d["t"])), np.atleast_1d(array_from_json(d["s"])))
        if "genus" in d and d["genus"] != p.genus:
            raise GenusMismatch(f"genus field {d['genus']} != vector length {p.genus}")
        return p


@dataclass(frozen=True, eq=False)
class BettiCharacter:
    a: np.ndarray
    b: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a))
        object.__setattr__(self, "b", _vec(self.b))
        if self.normalized:
            for v in (self.a, self.b):
                if np.any((v.real < 0) | (v.real >= 1)):
                    raise ValueError("normalized exponents must have real part in [0, 1)")

    def normalize(self) -> "BettiCharacter":
        """Canonical representative with ``Re a, Re b`` in ``[0, 1)``."""
        def frac(v):
            r = v.real - np.floor(v.real)
            # tiny negatives round up to exactly 1
            return np.where(r >= 1.0, 0.0, r) + 1j * v.imag

        return BettiCharacter(frac(self.a), frac(self.b), normalized=True)

    def distance_mod_z(self, other: "BettiCharacter") -> float:
        """Max distance of exponent differences to the nearest integers."""
        d = np.concatenate([self.a - other.a, self.b - other.b])
        return float(np.max(np.abs(d - np.round(d.real))))


@dataclass(frozen=True, eq=False)
class JacobianPoint:
    """A point of ``C^g / (Z^g + Omega Z^g)``.

    ``u`` is the designated lift; ``m, n`` record the lattice shift that was
    removed, i.e. ``original = u + m + Omega n``.
    """

    u: np.ndarray
    m: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _vec(self.u))
        object.__setattr__(self, "m", np.asarray(self.m, dtype=np.int64))
        object.__setattr__(self, "n", np.asarray(self.n, dtype=np.int64))

    @classmethod
    def lift(cls, u) -> "JacobianPoint":
        u = _vec(u)
        z = np.zeros(len(u), dtype=np.int64)
        return cls(u, z, z)

    def reduced(self, omega: PeriodMatrix) -> "JacobianPoint":
        """Representative with ``u = x + Omega y``, ``x, y`` in ``[0, 1)``."""
        x, y = lattice_coords(self.u, omega)
        fm, fn = np.floor(x).astype(np.int64), np.floor(y).astype(np.int64)
        u = self.u - fm - omega.omega @ fn
        return JacobianPoint(u, self.m + fm, self.n + fn)


def lattice_coords(u, omega: PeriodMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Real ``x, y`` with ``u = x + Omega y``."""
    u = np.asarray(u, dtype=complex)
    y = omega.imag_inv @ u.imag
    x = u.real - omega.real @ y
    return x, y


def lattice_distance(u, v, omega: PeriodMatrix) -> float:
    """Size of ``u - v`` after removing the nearest lattice vector."""
    x, y = lattice_coords(np.asarray(u) - np.asarray(v), omega)
    x, y = x - np.round(x), y - np.round(y)
    return float(np.max(np.abs(x + omega.omega @ y), initial=0.0))


def _check(p: DeRhamPoint, omega: PeriodMatrix):
    if p.genus != omega.genus:
        raise GenusMismatch(f"point genus {p.genus} != period matrix genus {omega.genus}")


def betti_of_deRham(p: DeRhamPoint, omega) -> BettiCharacter:
    """Holonomy exponents: ``2 pi i a = t + s``, ``2 pi i b = Omega t + conj(Omega) s``."""
    omega = validate(omega)
    _check(p, omega)
    a = (p.t + p.s) / TWO_PI_I
    b = (omega.omega.T @ p.t + omega.omega.conj().T @ p.s) / TWO_PI_I
    return BettiCharacter(a, b)


def unitary_betti(p: DeRhamPoint, omega) -> BettiCharacter:
    """Exponents of the Chern connection ``d + nu'' - conj(nu'')`` (real by construction)."""
    omega = validate(omega)
    _check(p, omega)
    s, sb = p.s, p.s.conj()
    a = (s - sb) / TWO_PI_I
    b = (omega.omega.conj().T @ s - omega.omega.T @ sb) / TWO_PI_I
    return BettiCharacter(a.real, b.real)


def jacobian_of_betti(chi: BettiCharacter, omega) -> JacobianPoint:
    """``u = b - Omega^T a``."""
    omega = validate(omega)
    return JacobianPoint.lift(chi.b - omega.omega.T @ chi.a)


def jacobian_of_deRham(p: DeRhamPoint, omega) -> JacobianPoint:
    """``u_j = -(1/pi) sum_k s_k (Im Omega)_kj``."""
    omega = validate(omega)
    _check(p, omega)
    return JacobianPoint.lift(-(omega.imag.T @ p.s) / math.pi)


def unitary_section(u, omega) -> DeRhamPoint:
    """Unitary connection over ``u``: ``s = -pi (Im Omega)^{-1} u``, ``t = -conj(s)``."""
    omega = validate(omega)
    if isinstance(u, JacobianPoint):
        u = u.u
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    if len(u) != omega.genus:
        raise GenusMismatch("u has wrong length")
    s = -math.pi * (omega.imag_inv.T @ u)
    return DeRhamPoint(-s.conj(), s)


# Gauss-Manin invariants -------------------------------------------------------

BASE_KINDS = ("dt", "ds", "dtb", "dsb")


@dataclass(frozen=True, eq=False)
class GaussManinInvariant:
    """A class-valued 1-form ``sum_{c, k} C[c, k] [class_c] (x) gen_k``.

    Rows: ``omega_1..omega_g, conj(omega_1)..conj(omega_g)``. Columns: base
    generators ``dt_1..dt_g, ds_1..ds_g, dtb_1..dtb_g, dsb_1..dsb_g`` (``b``
    marks the conjugate generator). The two g x 2g blocks on the ``dt, ds``
    columns are ``holomorphic_block`` and ``antiholomorphic_block``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[1] != 2 * c.shape[0]:
            raise ValueError("coefficient matrix must have shape (2g, 4g)")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def genus(self) -> int:
        return self.coeffs.shape[0] // 2

    @property
    def holomorphic_block(self) -> np.ndarray:
        g = self.genus
        return self.coeffs[:g, : 2 * g]

    @property
    def antiholomorphic_block(self) -> np.ndarray:
        g = self.genus
        return self.coeffs[g:, : 2 * g]

    def generator_names(self) -> list[str]:
        return [f"{k}{i + 1}" for k in BASE_KINDS for i in range(self.genus)]

    def prime(self) -> "GaussManinInvariant":
        """Projection onto the ``H^{1,0}`` rows."""
        c = self.coeffs.copy()
        c[self.genus:] = 0
        return GaussManinInvariant(c)

    def double_prime(self) -> "GaussManinInvariant":
        """Projection onto the ``H^{0,1}`` rows."""
        c = self.coeffs.copy()
        c[: self.genus] = 0
        return GaussManinInvariant(c)

    def conj(self) -> "GaussManinInvariant":
        """Complex conjugate: swaps class types and conjugate generators."""
        g = self.genus
        c = self.coeffs.conj()
        c = np.concatenate([c[g:], c[:g]], axis=0)
        c = np.concatenate([c[:, 2 * g:], c[:, : 2 * g]], axis=1)
        return GaussManinInvariant(c)

    def __add__(self, other):
        return GaussManinInvariant(self.coeffs + other.coeffs)

    def __mul__(self, k):
        return GaussManinInvariant(self.coeffs * k)

    __rmul__ = __mul__

    @classmethod
    def zero(cls, g: int) -> "GaussManinInvariant":
        return cls(np.zeros((2 * g, 4 * g), dtype=complex))


def gm_invariant(g: int) -> GaussManinInvariant:
    """Invariant of the universal family: ``sum omega_i (x) dt_i + conj(omega_i) (x) ds_i``."""
    if g < 1:
        raise ValueError("genus must be >= 1")
    c = np.zeros((2 * g, 4 * g), dtype=complex)
    c[:g, :g] = np.eye(g)
    c[g:, g: 2 * g] = np.eye(g)
    return GaussManinInvariant(c)


def pullback_invariant(g: int, dt, ds) -> GaussManinInvariant:
    """Invariant of the family ``phi^* nu`` for a map with differential ``(dt, ds)``.

    ``dt`` and ``ds`` are g x 4g matrices expressing ``d(t_i o phi)`` and
    ``d(s_i o phi)`` in the base generators.
    """
    c = np.zeros((2 * g, 4 * g), dtype=complex)
    c[:g] = np.asarray(dt, dtype=complex)
    c[g:] = np.asarray(ds, dtype=complex)
    return GaussManinInvariant(c)


def unitary_family_invariant(g: int) -> GaussManinInvariant:
    """Invariant of the Chern family ``(t, s) -> (-conj(s), s)``."""
    z = np.zeros((g, 4 * g), dtype=complex)
    dt = z.copy()
    dt[:, 3 * g:] = -np.eye(g)
    ds = z.copy()
    ds[:, g: 2 * g] = np.eye(g)
    return pullback_invariant(g, dt, ds)


def frozen_s_invariant(g: int) -> GaussManinInvariant:
    """Invariant of ``(t, s) -> (t, s_0)``: its ``(0,1)`` part vanishes."""
    z = np.zeros((g, 4 * g), dtype=complex)
    dt = z.copy()
    dt[:, :g] = np.eye(g)
    return pullback_invariant(g, dt, z)
