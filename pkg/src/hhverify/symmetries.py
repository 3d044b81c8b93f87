"""First integrals, pure-gauge variations and the hyper-Kaehler reduction."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .expr import ZERO, RationalExpr, const, var
from .expr.poly import gen_index
from .forms import (
    DifferentialForm,
    VectorFieldOperator,
    exterior_d,
    lie_derivative_coeff,
    lie_derivative_endo,
    lie_derivative_sym2,
)
from .geometry import (
    EPS,
    GeometryBundle,
    PotentialPair,
    ScalarPotential,
    _geo,
    build_geometry,
    dW,
    dWup,
    dX,
    dXup,
    endomorphism,
    hypereq_residual,
)

__all__ = [
    "first_integral_obstruction",
    "GaugeGenerator",
    "GaugeError",
    "gauge_vector_field",
    "pure_gauge_variation",
    "hyper_kahler_reduction",
    "HyperKahlerVerdict",
    "second_heavenly_residual",
    "rational_exact_potential",
]

HALF = const(1) / 2


def first_integral_density(theta) -> list[list[RationalExpr]]:
    """E[A][C] = d_{w^A} Theta_C + (d_A Theta_B)(d^B Theta_C)."""
    J = _geo(theta).jet
    E = [[ZERO, ZERO], [ZERO, ZERO]]
    for A, C in itertools.product((0, 1), repeat=2):
        e = J.low(C, ("w", A))
        for B in (0, 1):
            # d^B = eps^{BF} d_F
            for F in (0, 1):
                s = EPS[B][F]
                if s:
                    t = J.low(B, ("x", A)) * J.low(C, ("x", F))
                    if t:
                        e = e + t.scale(s)
        E[A][C] = e
    return E


def first_integral_obstruction(theta) -> tuple[RationalExpr, RationalExpr]:
    """Curl d^A E_{AC}; it vanishes iff Lambda_C with d_A Lambda_C = E_{AC} exists."""
    E = first_integral_density(theta)
    return tuple(dXup(E[0][C], 0) + dXup(E[1][C], 1) for C in (0, 1))


# gauge ---------------------------------------------------------------------

class GaugeError(ValueError):
    """Generator data depends on x or y."""


@dataclass(frozen=True)
class GaugeGenerator:
    """h(w^A), g^A(w^B), F^A(w^B) defining a pure-gauge variation."""

    h: RationalExpr = ZERO
    g0: RationalExpr = ZERO
    g1: RationalExpr = ZERO
    F0: RationalExpr = ZERO
    F1: RationalExpr = ZERO

    def __post_init__(self):
        for name in ("h", "g0", "g1", "F0", "F1"):
            v = RationalExpr.coerce(getattr(self, name))
            object.__setattr__(self, name, v)
            if v.depends_on("x") or v.depends_on("y"):
                raise GaugeError(f"gauge datum {name} depends on x or y")


def _x_up(A: int) -> RationalExpr:
    return var("y") if A == 0 else -var("x")


def gauge_vector_field(gen: GaugeGenerator) -> VectorFieldOperator:
    """M = (dh/dw_A) d/dw^A + (g^B + x^A d_{w^A} M^{w^B}) d/dx^B."""
    Mw = [dWup(gen.h, 0), dWup(gen.h, 1)]
    g = [gen.g0, gen.g1]
    Mx = []
    for B in (0, 1):
        acc = g[B]
        for A in (0, 1):
            acc = acc + _x_up(A) * dW(Mw[B], A)
        Mx.append(acc)
    # d/dx^0 = d/dy, d/dx^1 = -d/dx
    return VectorFieldOperator([Mw[0], Mw[1], -Mx[1], Mx[0]])


def gauge_delta_theta(theta: PotentialPair, gen: GaugeGenerator) -> PotentialPair:
    """First-order variation delta Theta_A of the potentials."""
    M = gauge_vector_field(gen)
    Mw = [M.coeffs[0], M.coeffs[1]]
    g_low = (-gen.g1, gen.g0)
    F_low = (-gen.F1, gen.F0)
    out = []
    for A in (0, 1):
        acc = M(theta.lower(A)) + F_low[A]
        for C in (0, 1):
            acc = acc + theta.lower(C) * dW(Mw[C], A)
            acc = acc + _x_up(C) * dW(g_low[A], C)
        for C, D in itertools.product((0, 1), repeat=2):
            t = dW(dW(dW(gen.h, C), D), A)
            if t:
                acc = acc + _x_up(C) * _x_up(D) * t * HALF
        out.append(acc)
    return PotentialPair(out[0], out[1])


def _eps_coefficient(e: RationalExpr, k: int, order: int = 1) -> RationalExpr:
    # coefficient of eps^order: differentiate and set eps = 0
    d = e
    for _ in range(order):
        d = d.diff_gen(k)
    d = d.substitute({k: ZERO})
    if order > 1:
        import math
        d = d.scale(const(1) / math.factorial(order))
    return d


def pure_gauge_variation(theta: PotentialPair, gen: GaugeGenerator) -> dict:
    """Compare the potential-level variation with L_M acting on the geometry."""
    M = gauge_vector_field(gen)
    dth = gauge_delta_theta(theta, gen)
    k = gen_index("eps")
    eps = var("eps")
    pert = PotentialPair(theta.theta0 + eps * dth.theta0, theta.theta1 + eps * dth.theta1)
    geo0 = build_geometry(theta)
    geo1 = build_geometry(pert)
    g0 = geo0.metric
    lie_g = lie_derivative_sym2(M, g0)
    metric_res = [[_eps_coefficient(geo1.metric[m][n], k) - lie_g[m][n] for n in range(4)] for m in range(4)]
    lin = tuple(_eps_coefficient(r, k) for r in hypereq_residual(geo1))
    sigma11 = geo0.sigma_primed[(1, 1)]
    J10 = endomorphism(geo0, 1, 0)
    return {
        "delta_theta": dth,
        "vector_field": M,
        "metric_variation_residual": metric_res,
        "linearized_field_equation": lin,
        "lie_sigma_11": lie_derivative_coeff(M, sigma11),
        "lie_J10": lie_derivative_endo(M, J10),
    }


# hyper-Kaehler reduction ---------------------------------------------------

def second_heavenly_residual(theta) -> RationalExpr:
    """d_{w^A} d^A Theta + 1/2 (d_A d_B Theta)(d^A d^B Theta)."""
    th = theta.theta if isinstance(theta, ScalarPotential) else RationalExpr.coerce(theta)
    lin = ZERO
    for A in (0, 1):
        lin = lin + dW(dXup(th, A), A)
    d2 = [[dX(dX(th, A), B) for B in (0, 1)] for A in (0, 1)]
    non = ZERO
    for A, B in itertools.product((0, 1), repeat=2):
        if not d2[A][B]:
            continue
        up = ZERO
        for E, F in itertools.product((0, 1), repeat=2):
            s = EPS[A][E] * EPS[B][F]
            if s and d2[E][F]:
                up = up + d2[E][F].scale(s)
        if up:
            non = non + d2[A][B] * up
    return lin + non * HALF


@dataclass
class HyperKahlerVerdict:
    divergence: RationalExpr
    divergence_free: bool
    gradient_residual: tuple | None = None
    gradient_ok: bool | None = None
    heavenly_residual: RationalExpr | None = None
    heavenly_ok: bool | None = None

    @property
    def hyper_kahler(self) -> bool:
        return self.divergence_free

    @property
    def consistent(self) -> bool:
        if self.gradient_ok is None:
            return True
        if not self.gradient_ok:
            return False
        return bool(self.heavenly_ok) and self.divergence_free


def hyper_kahler_reduction(theta: PotentialPair, candidate: ScalarPotential | None = None) -> HyperKahlerVerdict:
    """Divergence test d_A Theta^A = 0 plus optional scalar-potential checks."""
    geo = _geo(theta)
    J = geo.jet
    div = J.up(0, ("x", 0)) + J.up(1, ("x", 1))
    v = HyperKahlerVerdict(divergence=div, divergence_free=div.is_zero())
    if candidate is not None:
        th = candidate.theta
        # Theta^A = d^A Theta = eps^{AB} d_B Theta
        grad = (dXup(th, 0), dXup(th, 1))
        res = (theta.upper(0) - grad[0], theta.upper(1) - grad[1])
        v.gradient_residual = res
        v.gradient_ok = all(r.is_zero() for r in res)
        v.heavenly_residual = second_heavenly_residual(th)
        v.heavenly_ok = v.heavenly_residual.is_zero()
    return v


# exactness of the Lee form ---------------------------------------------------

def rational_exact_potential(form: DifferentialForm):
    """Return phi with d phi = form when a rational phi exists, else ``None``.

    Closedness is checked exactly first.  The potential is then built one
    variable at a time from rational antiderivatives (sympy's ``ratint``);
    a logarithmic part means no rational primitive in that variable, which
    is reported as ``None`` ("not rational-exact").
    """
    from .expr.bridge import from_sympy, to_sympy

    if form.degree != 1:
        raise ValueError("expected a one-form")
    if not exterior_d(form).is_zero():
        return None
    if form.is_zero():
        return ZERO
    import sympy as sp
    from sympy.integrals.rationaltools import ratint

    names = ("w", "z", "x", "y")
    phi = ZERO
    rest = form
    for mu in range(4):
        c = rest[(mu,)]
        if not c:
            continue
        sym = sp.Symbol(names[mu])
        F = ratint(sp.cancel(to_sympy(c)), sym)
        if F.has(sp.log) or F.has(sp.atan) or F.has(sp.RootSum):
            return None
        piece = from_sympy(F)
        phi = phi + piece
        d = DifferentialForm(1, {(nu,): piece.diff(names[nu]) for nu in range(4)})
        rest = rest - d
    if not rest.is_zero():
        return None
    return phi
