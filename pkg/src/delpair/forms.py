"""Constant-coefficient exterior algebra on the moduli space, with Laurent-in-lambda coefficients.

Generators are named ``dt1, ds1, dtb1, dsb1, ...`` (``b`` for the complex
conjugate generator) and ``dl`` for ``d lambda``. A :class:`FormExpr` maps
canonically ordered monomials to Laurent polynomials ``{degree: coefficient}``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import GenusMismatch
from .jsonio import cplx_from_json, cplx_to_json
from .moduli import DeRhamPoint, GaussManinInvariant, gm_invariant, unitary_family_invariant
from .period import validate

DEGREE_WINDOW = (-4, 4)
_KIND_ORDER = {"dt": 0, "ds": 1, "dtb": 2, "dsb": 3, "dl": 4}
_CONJ_KIND = {"dt": "dtb", "dtb": "dt", "ds": "dsb", "dsb": "ds"}
_NAME_RE = re.compile(r"^(dtb|dsb|dt|ds)(\d+)$")

Laurent = dict  # degree -> complex


def parse_generator(name: str) -> tuple[str, int]:
    if name == "dl":
        return "dl", 0
    m = _NAME_RE.match(name)
    if not m:
        raise ValueError(f"unknown generator {name!r}")
    return m.group(1), int(m.group(2))


def _gen_key(name: str):
    kind, idx = parse_generator(name)
    return (_KIND_ORDER[kind], idx)


def _normalize(mono: Iterable[str]) -> tuple[int, tuple[str, ...]]:
    """Sort a monomial, returning (sign, sorted monomial); sign 0 for repeats."""
    items = list(mono)
    if len(set(items)) != len(items):
        return 0, ()
    keys = [_gen_key(x) for x in items]
    sign = 1
    # bubble sort keeps track of the permutation parity
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if keys[j] > keys[j + 1]:
                keys[j], keys[j + 1] = keys[j + 1], keys[j]
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    return sign, tuple(items)


def _check_degree(d: int):
    lo, hi = DEGREE_WINDOW
    if not lo <= d <= hi:
        raise ValueError(f"lambda degree {d} outside window [{lo}, {hi}]")


@dataclass(frozen=True, eq=False)
class FormExpr:
    terms: Mapping[tuple[str, ...], Mapping[int, complex]]

    def __post_init__(self):
        clean = {}
        for mono, poly in self.terms.items():
            p = {int(d): complex(c) for d, c in poly.items() if c != 0}
            for d in p:
                _check_degree(d)
            if p:
                clean[tuple(mono)] = p
        object.__setattr__(self, "terms", clean)

    # construction ------------------------------------------------------------
    @classmethod
    def zero(cls) -> "FormExpr":
        return cls({})

    @classmethod
    def scalar(cls, c: complex, degree: int = 0) -> "FormExpr":
        return cls({(): {degree: c}})

    @classmethod
    def gen(cls, name: str) -> "FormExpr":
        parse_generator(name)
        return cls({(name,): {0: 1.0}})

    @classmethod
    def monomial(cls, names: Iterable[str], coeff: complex = 1.0, degree: int = 0) -> "FormExpr":
        sign, mono = _normalize(names)
        if sign == 0:
            return cls.zero()
        return cls({mono: {degree: sign * coeff}})

    # algebra -------------------------------------------------------------------
    def __add__(self, other: "FormExpr") -> "FormExpr":
        out = {m: dict(p) for m, p in self.terms.items()}
        for m, p in other.terms.items():
            q = out.setdefault(m, {})
            for d, c in p.items():
                q[d] = q.get(d, 0) + c
        return FormExpr(out)

    def __neg__(self) -> "FormExpr":
        return self * -1

    def __sub__(self, other: "FormExpr") -> "FormExpr":
        return self + (-other)

    def __mul__(self, k: complex) -> "FormExpr":
        return FormExpr({m: {d: c * k for d, c in p.items()} for m, p in self.terms.items()})

    __rmul__ = __mul__

    def lam(self, power: int) -> "FormExpr":
        """Multiply by ``lambda**power``."""
        return FormExpr({m: {d + power: c for d, c in p.items()} for m, p in self.terms.items()})

    def wedge(self, other: "FormExpr") -> "FormExpr":
        out: dict = {}
        for m1, p1 in self.terms.items():
            for m2, p2 in other.terms.items():
                sign, mono = _normalize(m1 + m2)
                if sign == 0:
                    continue
                q = out.setdefault(mono, {})
                for d1, c1 in p1.items():
                    for d2, c2 in p2.items():
                        d = d1 + d2
                        _check_degree(d)
                        q[d] = q.get(d, 0) + sign * c1 * c2
        return FormExpr(out)

    __xor__ = wedge

    # inspection ----------------------------------------------------------------
    def coefficient(self, names: Iterable[str], degree: int = 0) -> complex:
        sign, mono = _normalize(names)
        if sign == 0:
            return 0j
        return sign * self.terms.get(mono, {}).get(degree, 0j)

    def degrees(self) -> set[int]:
        return {d for p in self.terms.values() for d in p}

    def lambda_part(self, degree: int) -> "FormExpr":
        """Coefficient form of ``lambda**degree`` (returned at degree 0)."""
        return FormExpr({m: {0: p[degree]} for m, p in self.terms.items() if degree in p})

    def without(self, name: str) -> "FormExpr":
        """Drop every monomial containing ``name`` (e.g. restrict to ``d lambda = 0``)."""
        return FormExpr({m: p for m, p in self.terms.items() if name not in m})

    def only(self, name: str) -> "FormExpr":
        return FormExpr({m: p for m, p in self.terms.items() if name in m})

    def evaluate(self, lam: complex) -> "FormExpr":
        """Substitute a numeric ``lambda``; the result has degree-0 coefficients."""
        return FormExpr(
            {m: {0: sum(c * lam**d for d, c in p.items())} for m, p in self.terms.items()}
        )

    def conj(self) -> "FormExpr":
        """Complex conjugate with ``lambda`` held formal.

        Coefficients are conjugated degree by degree and generators flip to
        their conjugates; no ``conj(lambda)`` is introduced, so for a numeric
        reality check call :meth:`evaluate` first.
        """
        out = FormExpr.zero()
        for m, p in self.terms.items():
            if "dl" in m:
                raise ValueError("conjugate of d lambda is not modeled")
            names = []
            for x in m:
                kind, idx = parse_generator(x)
                names.append(f"{_CONJ_KIND[kind]}{idx}")
            for d, c in p.items():
                out = out + FormExpr.monomial(names, np.conj(c), d)
        return out

    def max_abs(self) -> float:
        return max((abs(c) for p in self.terms.values() for c in p.values()), default=0.0)

    def distance(self, other: "FormExpr") -> float:
        return (self - other).max_abs()

    def is_zero(self) -> bool:
        return not self.terms

    # serialization -------------------------------------------------------------
    def to_json(self) -> list:
        return [
            {"monomial": list(m), "coeff": [[d, cplx_to_json(c)] for d, c in sorted(p.items())]}
            for m, p in sorted(self.terms.items(), key=lambda kv: [_gen_key(x) for x in kv[0]])
        ]

    @classmethod
    def from_json(cls, data: list) -> "FormExpr":
        out = cls.zero()
        for item in data:
            for d, c in item["coeff"]:
                out = out + cls.monomial(item["monomial"], cplx_from_json(c), int(d))
        return out

    def __repr__(self):
        parts = []
        for m, p in self.terms.items():
            coeff = " + ".join(f"({c:.6g})l^{d}" if d else f"({c:.6g})" for d, c in sorted(p.items()))
            parts.append(f"[{coeff}] {'^'.join(m) or '1'}")
        return "FormExpr(" + (" + ".join(parts) or "0") + ")"


def wedge(x: FormExpr, y: FormExpr) -> FormExpr:
    return x.wedge(y)


# relative cohomology ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RelClass:
    """Class ``sum_i c_i omega_i + c_{g+i} conj(omega_i)`` in ``H^1_dR``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.coeffs, dtype=complex))
        if c.ndim != 1 or len(c) % 2:
            raise ValueError("RelClass needs 2g coefficients")
        if not np.all(np.isfinite(c)):
            raise ValueError("RelClass coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_parts(cls, holo, antiholo) -> "RelClass":
        return cls(np.concatenate([np.atleast_1d(holo), np.atleast_1d(antiholo)]))

    @property
    def genus(self) -> int:
        return len(self.coeffs) // 2

    @property
    def holo(self) -> np.ndarray:
        return self.coeffs[: self.genus]

    @property
    def antiholo(self) -> np.ndarray:
        return self.coeffs[self.genus:]

    def prime(self) -> "RelClass":
        return RelClass.from_parts(self.holo, np.zeros(self.genus))

    def double_prime(self) -> "RelClass":
        return RelClass.from_parts(np.zeros(self.genus), self.antiholo)

    def conj(self) -> "RelClass":
        return RelClass.from_parts(self.antiholo.conj(), self.holo.conj())


def pairing_matrix(omega) -> np.ndarray:
    """Fiber integrals of cup products on the basis ``omega_i, conj(omega_j)``.

    Riemann bilinear relations: ``int omega_i ^ conj(omega_j) = -2i (Im Omega)_ij``;
    holomorphic-holomorphic and antiholomorphic pairs integrate to zero.
    """
    omega = validate(omega)
    g, Y = omega.genus, omega.imag
    P = np.zeros((2 * g, 2 * g), dtype=complex)
    P[:g, g:] = -2j * Y
    P[g:, :g] = 2j * Y.T
    return P


def fiber_pairing(omega, c1: RelClass, c2: RelClass) -> complex:
    omega = validate(omega)
    if c1.genus != omega.genus or c2.genus != omega.genus:
        raise GenusMismatch("class genus does not match period matrix")
    return complex(c1.coeffs @ pairing_matrix(omega) @ c2.coeffs)


def _cup_form(omega, nu_l: GaussManinInvariant, nu_m: GaussManinInvariant) -> FormExpr:
    """``pi_*(nu_l cup nu_m)`` as a 2-form (cup on classes, wedge on base forms)."""
    omega = validate(omega)
    g = omega.genus
    if nu_l.genus != g or nu_m.genus != g:
        raise GenusMismatch("Gauss-Manin invariant genus does not match period matrix")
    K = nu_l.coeffs.T @ pairing_matrix(omega) @ nu_m.coeffs
    names = nu_l.generator_names()
    out = FormExpr.zero()
    for i, j in zip(*np.nonzero(K)):
        out = out + FormExpr.monomial((names[i], names[j]), K[i, j])
    return out


def intersection_curvature(omega, nu_l: GaussManinInvariant, nu_m: GaussManinInvariant) -> FormExpr:
    """Curvature ``(1/2 pi i) pi_*(nabla_GM nu_L cup nabla_GM nu_M)``."""
    return _cup_form(omega, nu_l, nu_m) * (1 / (2j * math.pi))


def trace_curvature(omega, nu_l: GaussManinInvariant, nu_m) -> FormExpr:
    """Trace-connection curvature for a trivial family (vanishing Kodaira-Spencer term).

    ``(1/2 pi i) pi_*{ nu_L' cup nu_M'' - nu_L'' cup conj(nu_M'') }``. Only the
    ``(0,1)`` part of ``nu_m`` enters.

    ``nu_m`` is a :class:`GaussManinInvariant`. A :class:`DeRhamPoint` is also
    accepted: a unitary point stands for the Chern family ``t = -conj(s)``
    through it, any other point for the universal family.
    """
    if isinstance(nu_m, DeRhamPoint):
        g = nu_m.genus
        nu_m = unitary_family_invariant(g) if nu_m.is_unitary() else gm_invariant(g)
    a = _cup_form(omega, nu_l.prime(), nu_m.double_prime())
    b = _cup_form(omega, nu_l.double_prime(), nu_m.double_prime().conj())
    return (a - b) * (1 / (2j * math.pi))


def expected_universal_curvature(omega) -> FormExpr:
    """Closed form ``-(2/pi) sum (Im Omega)_ij dt_i ^ ds_j`` for the universal bundle."""
    omega = validate(omega)
    g, Y = omega.genus, omega.imag
    out = FormExpr.zero()
    for i in range(g):
        for j in range(g):
            out = out + FormExpr.monomial((f"dt{i + 1}", f"ds{j + 1}"), -2 / math.pi * Y[i, j])
    return out
