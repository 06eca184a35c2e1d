"""Complex numbers travel through JSON as ``[re, im]`` pairs."""

from __future__ import annotations

import numpy as np


def cplx_to_json(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def cplx_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    re, im = v
    return complex(float(re), float(im))


def array_to_json(a):
    """Nested lists of ``[re, im]`` for a complex array of any rank."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return cplx_to_json(a)
    return [array_to_json(x) for x in a]


def array_from_json(v) -> np.ndarray:
    def conv(x):
        if isinstance(x, (int, float, str)):
            return cplx_from_json(x)
        if len(x) == 2 and all(isinstance(e, (int, float)) for e in x):
            return cplx_from_json(x)
        return [conv(e) for e in x]

    return np.asarray(conv(v), dtype=complex)
