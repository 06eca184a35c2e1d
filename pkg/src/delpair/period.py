"""Period matrices and the real linear algebra of their imaginary parts."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NotPositiveDefiniteImaginaryPart, NotSymmetric

SYMMETRY_TOL = 1e-12
# Inputs are assumed moderately reduced; no Siegel reduction is attempted.
MIN_IMAG_EIGENVALUE = 1e-3


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """A validated genus-g period matrix.

    Construct through :func:`validate`; the instance is treated as immutable.
    """

    omega: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.omega.setflags(write=False)

    @property
    def genus(self) -> int:
        return self.omega.shape[0]

    @property
    def real(self) -> np.ndarray:
        return self.omega.real

    @property
    def imag(self) -> np.ndarray:
        return self.omega.imag

    @cached_property
    def imag_chol(self) -> np.ndarray:
        return np.linalg.cholesky(self.omega.imag)

    @cached_property
    def imag_inv(self) -> np.ndarray:
        inv = np.linalg.inv(self.omega.imag)
        return 0.5 * (inv + inv.T)

    def conj_neg(self) -> "PeriodMatrix":
        """The period matrix ``-conj(Omega)`` of the conjugate surface."""
        return PeriodMatrix(-self.omega.conj())

    def __repr__(self):
        return f"PeriodMatrix(g={self.genus}, omega={self.omega.tolist()!r})"


def validate(raw) -> PeriodMatrix:
    """Check symmetry and positivity of ``Im raw``; return a PeriodMatrix.

    Scalars are accepted as genus-1 input. Raises ``NotSymmetric`` or
    ``NotPositiveDefiniteImaginaryPart`` naming the violated invariant.
    """
    if isinstance(raw, PeriodMatrix):
        return raw
    a = np.array(raw, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"period matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("period matrix has non-finite entries")
    asym = np.max(np.abs(a - a.T))
    if asym >= SYMMETRY_TOL:
        raise NotSymmetric(f"max |Omega_ij - Omega_ji| = {asym:.3e}")
    a = 0.5 * (a + a.T)
    eig = np.linalg.eigvalsh(a.imag)
    if eig[0] <= MIN_IMAG_EIGENVALUE:
        raise NotPositiveDefiniteImaginaryPart(
            f"smallest eigenvalue of Im Omega is {eig[0]:.3e} "
            f"(need > {MIN_IMAG_EIGENVALUE:g})"
        )
    return PeriodMatrix(a)


def imag_inverse(omega: PeriodMatrix) -> np.ndarray:
    """``(Im Omega)^{-1}``, symmetrized."""
    return validate(omega).imag_inv


def imag_cholesky(omega: PeriodMatrix) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == Im Omega``."""
    return validate(omega).imag_chol


def random_period_matrix(genus: int, rng: np.random.Generator) -> PeriodMatrix:
    """A moderately reduced random period matrix, for test grids."""
    x = rng.uniform(-0.5, 0.5, (genus, genus))
    x = 0.5 * (x + x.T)
    a = rng.uniform(-0.4, 0.4, (genus, genus))
    y = a @ a.T + np.diag(rng.uniform(0.8, 1.6, genus))
    return validate(x + 1j * y)
