"""Potentials from twistor functions by contour integration.

A twistor function component with constant ``c`` and exponents ``(p, q)``,

    h = (-1)^p c pi_{0'}^{p+q} / ((omega^0)^{q+1} (omega^1)^{p+1}),

restricted to the line omega^A = x^{AA'} pi_{A'} and written in the affine
coordinate lam = pi_{0'}/pi_{1'}, gives the one-form

    h pi.dpi = -(-1)^p c lam^{p+q} / ((w + lam y)^{q+1} (z - lam x)^{p+1}) dlam.

Theta_A is (1/2 pi i) times the integral of that form over a contour that
goes clockwise around lam = -w/y and leaves lam = z/x outside.  So it is
minus the residue at -w/y, or equivalently the residue at z/x.

With this h the residue is binom(p+q, p) c w^p z^q / D^{p+q+1}.  Setting
``normalised=True`` divides c by that binomial so the residue is exactly
the elementary state c w^p z^q / D^{p+q+1}.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .expr import ONE, ZERO, NumericPoint, RationalExpr, const, var
from .expr import atoms as AT
from .expr import poly as P
from .geometry import PotentialPair

__all__ = [
    "TwistorFunctionSpec",
    "TwistorComponent",
    "PoleCollisionError",
    "integrand",
    "laurent_coefficient",
    "residue_theta",
    "residue_potentials",
    "contour_oracle",
    "ContourError",
]

T_NAME = "_t"
LAM = "lam"


class PoleCollisionError(ArithmeticError):
    """The two poles of the integrand coincide (or the pole order is off)."""


class ContourError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TwistorComponent:
    coeff: object
    p: int
    q: int
    normalised: bool = False

    def __post_init__(self):
        for v in (self.p, self.q):
            if not isinstance(v, int) or v < 0:
                raise ValueError("twistor exponents must be non-negative integers")
        object.__setattr__(self, "coeff", RationalExpr.coerce(self.coeff) if not isinstance(self.coeff, str)
                           else _parse(self.coeff))


def _parse(s):
    from .expr import parse_expr

    return parse_expr(s)


@dataclass(frozen=True)
class TwistorFunctionSpec:
    """h_0 with (a, k, l) and h_1 with (b, m, n)."""

    h0: TwistorComponent
    h1: TwistorComponent

    @classmethod
    def monomial(cls, k: int, l: int, m: int, n: int, a="a", b="b", normalised: bool = False) -> TwistorFunctionSpec:
        return cls(TwistorComponent(a, k, l, normalised), TwistorComponent(b, m, n, normalised))

    def component(self, A: int) -> TwistorComponent:
        return self.h0 if A == 0 else self.h1


def integrand(comp: TwistorComponent) -> RationalExpr:
    """The coefficient of dlam in h pi.dpi as a function of lam and x^{AA'}."""
    lam = var(LAM)
    w, z, x, y = (var(n) for n in ("w", "z", "x", "y"))
    p, q = comp.p, comp.q
    sign = const(-1 if p % 2 == 0 else 1)
    if comp.normalised:
        sign = sign / math.comb(p + q, p)
    top = comp.coeff * sign * (lam ** (p + q) if p + q else ONE)
    return top / ((w + lam * y) ** (q + 1) * (z - lam * x) ** (p + 1))


def laurent_coefficient(e: RationalExpr, k: int, order: int = -1) -> RationalExpr:
    """Coefficient of t^order in the Laurent expansion of ``e`` about t = 0.

    ``k`` is the generator index of t.  Denominator atoms are split into the
    bare t, atoms involving t (which do not vanish at t = 0 since they are
    irreducible and are not t itself) and t-free atoms; then the power
    series of num / Q(t) is built by the usual recursion.
    """
    tvar = 0
    q_poly = {0: 1}
    rest = []
    for aid, ex in e.den:
        if AT.atom_var(aid) == k:
            tvar = ex
        elif AT.atom_support(aid) >> k & 1:
            q_poly = P.p_mul(q_poly, AT.atom_pow(aid, ex))
        else:
            rest.append((aid, ex))
    need = order + tvar
    if need < 0:
        return ZERO
    num = P.p_collect(e.num, k)
    Q = P.p_collect(q_poly, k)
    q0 = Q.get(0)
    if not q0:
        raise PoleCollisionError("denominator factor vanishes at the expansion point")
    q0_inv = RationalExpr.from_poly(q0).reciprocal()
    series: list[RationalExpr] = []
    for j in range(need + 1):
        acc = RationalExpr.from_poly(num[j]) if j in num else ZERO
        for i in range(1, j + 1):
            if i in Q and series[j - i]:
                acc = acc - RationalExpr.from_poly(Q[i]) * series[j - i]
        series.append(acc * q0_inv if acc else ZERO)
    out = series[need]
    if not out or not rest:
        return out
    return out * RationalExpr(P.p_const(1), tuple(rest))


def _t_index() -> int:
    return P.declare(T_NAME)


def _residue(expr: RationalExpr, at: RationalExpr, expect_order: int | None = None) -> RationalExpr:
    k = _t_index()
    shifted = expr.substitute({LAM: at + var(T_NAME)})
    if expect_order is not None:
        got = 0
        for aid, ex in shifted.den:
            if AT.atom_var(aid) == k:
                got = ex
        if got != expect_order:
            raise PoleCollisionError(
                f"pole of order {got} where order {expect_order} was expected; the two poles collide")
    return laurent_coefficient(shifted, k, -1)


def residue_theta(comp: TwistorComponent, specialize: dict | None = None, pole: str = "w") -> RationalExpr:
    """Theta_A from one twistor component by an exact residue computation.

    ``pole='w'`` uses lam = -w/y (with the clockwise sign), ``pole='z'`` the
    residue at lam = z/x directly.  ``specialize`` substitutes coordinates
    first, which is how degenerate configurations are probed.
    """
    f = integrand(comp)
    if specialize:
        f = f.substitute(specialize)
    w, z, x, y = (var(n) for n in ("w", "z", "x", "y"))
    if specialize:
        w, z, x, y = (v.substitute(specialize) for v in (w, z, x, y))
    if pole == "w":
        if not y:
            raise PoleCollisionError("y = 0 moves the pole to infinity")
        at = -(w / y)
        return -_residue(f, at, comp.q + 1)
    if pole == "z":
        if not x:
            raise PoleCollisionError("x = 0 moves the pole to infinity")
        return _residue(f, z / x, comp.p + 1)
    raise ValueError("pole must be 'w' or 'z'")


def residue_potentials(spec: TwistorFunctionSpec, specialize: dict | None = None) -> PotentialPair:
    return PotentialPair(residue_theta(spec.h0, specialize), residue_theta(spec.h1, specialize))


def contour_oracle(comp: TwistorComponent, point: NumericPoint, samples: int = 256,
                   margin: float = 1e-3) -> complex:
    """(1/2 pi i) times the clockwise circle integral around lam = -w/y, by trapezoid rule.

    The radius is half the distance between the two poles.  If that leaves
    less than ``margin`` to either pole the contour cannot be placed.
    """
    if samples < 3:
        raise ValueError("need at least three samples")
    w, z, x, y = (point[n] for n in ("w", "z", "x", "y"))
    if abs(y) < margin or abs(x) < margin:
        raise ContourError("a pole sits at infinity for this point")
    c0 = -w / y
    c1 = z / x
    r = abs(c1 - c0) / 2
    if r < margin:
        raise ContourError("poles too close for a contour with the required margin")
    f = integrand(comp)
    acc = 0j
    for j in range(samples):
        e = cmath.exp(2j * math.pi * j / samples)
        lam = c0 + r * e
        acc += f.eval_numeric(point.with_values(**{LAM: lam})) * r * e
    # counterclockwise mean is (1/2 pi i) * integral; flip for clockwise
    return -acc / samples
