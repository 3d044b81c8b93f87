"""Differential forms and first-order operators in the basis (dw, dz, dx, dy).

Forms are stored sparsely: a ``k``-form maps strictly increasing index
tuples over 0..3 (w, z, x, y) to nonzero coefficients.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .expr import ZERO, RationalExpr

__all__ = [
    "DifferentialForm",
    "VectorFieldOperator",
    "basis_one_form",
    "basis_vector",
    "wedge",
    "exterior_d",
    "interior",
    "commutator",
    "lie_derivative",
    "lie_derivative_coeff",
    "cartan_lie_derivative",
]

NAMES = ("w", "z", "x", "y")


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation, 0 if an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class DifferentialForm:
    __slots__ = ("degree", "comps")

    def __init__(self, degree: int, comps: dict | None = None):
        if not 0 <= degree:
            raise ValueError("negative degree")
        self.degree = degree
        clean = {}
        if degree <= 4:
            for key, c in (comps or {}).items():
                key = tuple(key) if not isinstance(key, int) else (key,)
                if len(key) != degree:
                    raise ValueError("index tuple length must equal the degree")
                sign, skey = _sort_sign(key)
                if not sign:
                    continue
                c = RationalExpr.coerce(c)
                if sign < 0:
                    c = -c
                prev = clean.get(skey)
                c = c if prev is None else prev + c
                if c:
                    clean[skey] = c
                elif skey in clean:
                    del clean[skey]
        self.comps = clean

    @classmethod
    def scalar(cls, f) -> DifferentialForm:
        return cls(0, {(): f})

    def __getitem__(self, key) -> RationalExpr:
        key = tuple(key) if not isinstance(key, int) else (key,)
        sign, skey = _sort_sign(key)
        if not sign:
            return ZERO
        c = self.comps.get(skey, ZERO)
        return c if sign > 0 else -c

    def component(self, *names: str) -> RationalExpr:
        return self[tuple(NAMES.index(n) for n in names)]

    def is_zero(self) -> bool:
        return not self.comps

    def __add__(self, o: DifferentialForm) -> DifferentialForm:
        if o.degree != self.degree:
            raise ValueError("degree mismatch")
        d = dict(self.comps)
        for k, c in o.comps.items():
            d[k] = d[k] + c if k in d else c
        return DifferentialForm(self.degree, d)

    def __sub__(self, o: DifferentialForm) -> DifferentialForm:
        return self + (-o)

    def __neg__(self):
        return DifferentialForm(self.degree, {k: -c for k, c in self.comps.items()})

    def scale(self, f) -> DifferentialForm:
        f = RationalExpr.coerce(f)
        if not f:
            return DifferentialForm(self.degree)
        return DifferentialForm(self.degree, {k: c * f for k, c in self.comps.items()})

    __rmul__ = scale

    def map(self, fn) -> DifferentialForm:
        return DifferentialForm(self.degree, {k: fn(c) for k, c in self.comps.items()})

    def __eq__(self, o):
        return isinstance(o, DifferentialForm) and o.degree == self.degree and o.comps == self.comps

    def __hash__(self):
        return hash((self.degree, frozenset(self.comps.items())))

    def to_json(self) -> dict:
        return {"^".join("d" + NAMES[i] for i in k) if k else "1": str(c) for k, c in sorted(self.comps.items())}

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in self.to_json().items())
        return f"DifferentialForm({self.degree}, {{{body}}})"


def basis_one_form(name: str) -> DifferentialForm:
    return DifferentialForm(1, {(NAMES.index(name),): 1})


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    deg = a.degree + b.degree
    if deg > 4:
        return DifferentialForm(deg)
    out: dict = {}
    for ka, ca in a.comps.items():
        for kb, cb in b.comps.items():
            sign, key = _sort_sign(ka + kb)
            if not sign:
                continue
            t = ca * cb
            if sign < 0:
                t = -t
            out[key] = out[key] + t if key in out else t
    return DifferentialForm(deg, out)


def exterior_d(a: DifferentialForm) -> DifferentialForm:
    if a.degree >= 4:
        return DifferentialForm(a.degree + 1)
    out: dict = {}
    for key, c in a.comps.items():
        for mu in range(4):
            if mu in key:
                continue
            dc = c.diff(NAMES[mu])
            if not dc:
                continue
            sign, skey = _sort_sign((mu,) + key)
            t = dc if sign > 0 else -dc
            out[skey] = out[skey] + t if skey in out else t
    return DifferentialForm(a.degree + 1, out)


class VectorFieldOperator:
    """V = V^w d/dw + V^z d/dz + V^x d/dx + V^y d/dy acting on RationalExpr."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        c = tuple(RationalExpr.coerce(v) for v in coeffs)
        if len(c) != 4:
            raise ValueError("need four coefficients (w, z, x, y)")
        self.coeffs = c

    @classmethod
    def zero(cls) -> VectorFieldOperator:
        return cls((ZERO,) * 4)

    def __call__(self, f: RationalExpr) -> RationalExpr:
        acc = ZERO
        for mu, v in enumerate(self.coeffs):
            if v:
                d = f.diff(NAMES[mu])
                if d:
                    acc = acc + v * d
        return acc

    def __getitem__(self, mu: int) -> RationalExpr:
        return self.coeffs[mu]

    def __add__(self, o):
        return VectorFieldOperator(a + b for a, b in zip(self.coeffs, o.coeffs))

    def __sub__(self, o):
        return VectorFieldOperator(a - b for a, b in zip(self.coeffs, o.coeffs))

    def __neg__(self):
        return VectorFieldOperator(-a for a in self.coeffs)

    def scale(self, f) -> VectorFieldOperator:
        f = RationalExpr.coerce(f)
        return VectorFieldOperator(a * f for a in self.coeffs)

    def map(self, fn) -> VectorFieldOperator:
        return VectorFieldOperator(fn(a) for a in self.coeffs)

    def is_zero(self) -> bool:
        return all(not c for c in self.coeffs)

    def __eq__(self, o):
        return isinstance(o, VectorFieldOperator) and self.coeffs == o.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def to_json(self) -> dict:
        return {f"d/d{NAMES[i]}": str(c) for i, c in enumerate(self.coeffs) if c}

    def __repr__(self):
        return f"VectorFieldOperator({self.to_json()})"


def basis_vector(name: str) -> VectorFieldOperator:
    return VectorFieldOperator([1 if n == name else 0 for n in NAMES])


def commutator(v: VectorFieldOperator, u: VectorFieldOperator) -> VectorFieldOperator:
    return VectorFieldOperator(v(u.coeffs[mu]) - u(v.coeffs[mu]) for mu in range(4))


def interior(v: VectorFieldOperator, a: DifferentialForm) -> DifferentialForm:
    if a.degree < 1:
        raise ValueError("interior product needs a form of degree >= 1")
    out: dict = {}
    for key, c in a.comps.items():
        for pos, mu in enumerate(key):
            vm = v.coeffs[mu]
            if not vm:
                continue
            rest = key[:pos] + key[pos + 1:]
            t = vm * c
            if pos % 2:
                t = -t
            out[rest] = out[rest] + t if rest in out else t
    return DifferentialForm(a.degree - 1, out)


def evaluate(a: DifferentialForm, vectors: Sequence[VectorFieldOperator]) -> RationalExpr:
    """Plug vectors into a form: a(V1, ..., Vk)."""
    cur = a
    for v in vectors:
        cur = interior(v, cur)
    return cur.comps.get((), ZERO)


def cartan_lie_derivative(v: VectorFieldOperator, a: DifferentialForm) -> DifferentialForm:
    """L_V a = V _| da + d(V _| a)."""
    r = interior(v, exterior_d(a))
    if a.degree >= 1:
        r = r + exterior_d(interior(v, a))
    return r


def lie_derivative_coeff(v: VectorFieldOperator, a: DifferentialForm) -> DifferentialForm:
    """Coefficient formula (L_V a)_I = V(a_I) + sum_j a_{I; i_j -> mu} d_{i_j} V^mu."""
    k = a.degree
    out: dict = {}
    dv = [[v.coeffs[mu].diff(NAMES[nu]) for nu in range(4)] for mu in range(4)]
    for key in itertools.combinations(range(4), k):
        acc = v(a[key]) if key in a.comps else ZERO
        for pos, i in enumerate(key):
            for mu in range(4):
                if not dv[mu][i]:
                    continue
                k2 = key[:pos] + (mu,) + key[pos + 1:]
                c = a[k2]
                if c:
                    acc = acc + c * dv[mu][i]
        if acc:
            out[key] = acc
    return DifferentialForm(k, out)


lie_derivative = lie_derivative_coeff


def lie_derivative_scalar(v: VectorFieldOperator, f: RationalExpr) -> RationalExpr:
    return v(f)


def lie_derivative_sym2(v: VectorFieldOperator, g) -> list[list[RationalExpr]]:
    """(L_V g)_{mn} = V(g_mn) + g_{rn} d_m V^r + g_{mr} d_n V^r for a 4x4 array."""
    dv = [[v.coeffs[r].diff(NAMES[m]) for m in range(4)] for r in range(4)]
    out = [[ZERO] * 4 for _ in range(4)]
    for m in range(4):
        for n in range(4):
            acc = v(g[m][n])
            for r in range(4):
                if dv[r][m] and g[r][n]:
                    acc = acc + g[r][n] * dv[r][m]
                if dv[r][n] and g[m][r]:
                    acc = acc + g[m][r] * dv[r][n]
            out[m][n] = acc
    return out


def lie_derivative_endo(v: VectorFieldOperator, J) -> list[list[RationalExpr]]:
    """(L_V J)^i_j = V(J^i_j) - J^k_j d_k V^i + J^i_k d_j V^k for J[i][j] = J^i_j."""
    dv = [[v.coeffs[i].diff(NAMES[k]) for k in range(4)] for i in range(4)]
    out = [[ZERO] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(4):
            acc = v(J[i][j])
            for k in range(4):
                if J[k][j] and dv[i][k]:
                    acc = acc - J[k][j] * dv[i][k]
                if J[i][k] and dv[k][j]:
                    acc = acc + J[i][k] * dv[k][j]
            out[i][j] = acc
    return out

