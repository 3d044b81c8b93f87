"""Conversion to and from sympy (used for the few integrals we delegate)."""
from __future__ import annotations

from gmpy2 import mpq

from . import atoms as AT
from . import poly as P
from .coeffs import GaussianRational
from .rational import RationalExpr


def _coeff_to_sympy(c):
    import sympy as sp

    if isinstance(c, GaussianRational):
        return sp.Rational(int(c.re.numerator), int(c.re.denominator)) + sp.I * sp.Rational(
            int(c.im.numerator), int(c.im.denominator))
    return sp.Rational(int(c.numerator), int(c.denominator))


def poly_to_sympy(p: dict):
    import sympy as sp

    syms = {}
    acc = sp.Integer(0)
    for m, c in p.items():
        t = _coeff_to_sympy(c)
        for k, e in P.unpack(m):
            name = P.gen_name(k)
            s = syms.setdefault(name, sp.Symbol(name))
            t = t * s ** e
        acc += t
    return acc


def to_sympy(e: RationalExpr):
    den = 1
    for a, ex in e.den:
        den = den * poly_to_sympy(AT.atom_poly(a)) ** ex
    return poly_to_sympy(e.num) / den


def _sympy_poly_to_dict(expr) -> dict:
    import sympy as sp

    expr = sp.expand(expr)
    names = [str(s) for s in expr.free_symbols]
    for n in names:
        if not P.is_declared(n):
            P.declare(n)
    if not names:
        c = sp.nsimplify(expr)
        re, im = c.as_real_imag()
        v = GaussianRational.make(mpq(int(sp.numer(re)), int(sp.denom(re))), mpq(int(sp.numer(im)), int(sp.denom(im))))
        return P.p_const(v)
    syms = sorted(expr.free_symbols, key=str)
    poly = sp.Poly(expr, *syms)
    out = {}
    idx = [P.gen_index(str(s)) for s in syms]
    for key, c in poly.as_dict().items():
        m = 0
        for k, ex in zip(idx, key):
            m += ex << (P.FIELD * k)
        re, im = sp.nsimplify(c).as_real_imag()
        v = GaussianRational.make(mpq(int(sp.numer(re)), int(sp.denom(re))), mpq(int(sp.numer(im)), int(sp.denom(im))))
        if v:
            out[m] = v
    return out


def from_sympy(expr) -> RationalExpr:
    import sympy as sp

    num, den = sp.fraction(sp.together(expr))
    return RationalExpr.from_fraction(_sympy_poly_to_dict(num), _sympy_poly_to_dict(den))
