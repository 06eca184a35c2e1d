"""Finite-difference Wirtinger derivatives used as oracles for analytic formulas."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import DelpairError, StencilHitsSingularity


def wrap_phase(d):
    """Reduce the imaginary part of a log difference into ``(-pi, pi]``."""
    d = np.asarray(d, dtype=complex)
    im = d.imag - 2 * math.pi * np.round(d.imag / (2 * math.pi))
    return d.real + 1j * im


def _central(fn, w, h, wrap):
    try:
        vals = [fn(w + h), fn(w - h), fn(w + 1j * h), fn(w - 1j * h)]
    except (DelpairError, ZeroDivisionError, FloatingPointError) as exc:
        raise StencilHitsSingularity(f"stencil around {w} hit a singularity: {exc}") from exc
    vals = [np.asarray(v, dtype=complex) for v in vals]
    if not all(np.all(np.isfinite(v)) for v in vals):
        raise StencilHitsSingularity(f"non-finite value on the stencil around {w}")
    dx, dy = vals[0] - vals[1], vals[2] - vals[3]
    if wrap:
        dx, dy = wrap_phase(dx), wrap_phase(dy)
    return dx / (2 * h), dy / (2 * h)


def wirtinger_fd(
    fn: Callable[[complex], complex],
    w: complex,
    h: float = 1e-5,
    scheme: str = "central",
    *,
    conjugate: bool = False,
    wrap: bool = False,
):
    """Wirtinger derivative ``d/dw = (d/dx - i d/dy) / 2`` by central differences.

    Parameters
    ----------
    fn : callable
        Field evaluated at complex points (may return arrays).
    w : complex
        Base point.
    h : float
        Step along each real coordinate.
    scheme : {"central", "richardson"}
        ``richardson`` repeats the stencil with ``h/2`` and extrapolates.
    conjugate : bool
        Return ``d/dw-bar = (d/dx + i d/dy) / 2`` instead.
    wrap : bool
        Treat ``fn`` as a complex logarithm and unwrap differences mod ``2 pi i``.
    """
    if scheme not in ("central", "richardson"):
        raise ValueError(f"unknown scheme {scheme!r}")
    sgn = 1j if conjugate else -1j

    def once(step):
        dx, dy = _central(fn, w, step, wrap)
        return 0.5 * (dx + sgn * dy)

    d = once(h)
    if scheme == "richardson":
        d = (4 * once(h / 2) - d) / 3
    return d
