"""Explicit potential pairs: monomial, elementary states and their special cases."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .expr import ONE, ZERO, NumericPoint, RationalExpr, const, parse_expr, var
from .expr.numeric import random_complex
from .geometry import PotentialPair, ScalarPotential, build_geometry

__all__ = [
    "FamilySpec",
    "FamilyError",
    "make_family",
    "family_metric_check",
    "displayed_metric",
    "hk_scalar",
    "hk_scalar_unnormalised",
    "is_hk_parameters",
    "khl_invariant",
    "FAMILY_TAGS",
    "euclidean_slice_points",
    "euclidean_reality_defect",
]

FAMILY_TAGS = ("monomial", "elementary", "special-monomial", "sparling-tod", "eguchi-hanson", "flat")


class FamilyError(ValueError):
    pass


def _expr(v, default: str) -> RationalExpr:
    if v is None:
        return var(default)
    if isinstance(v, str):
        return parse_expr(v)
    return RationalExpr.coerce(v)


@dataclass(frozen=True)
class FamilySpec:
    """Which family, its integer exponents and its constants.

    ``a`` and ``b`` default to the symbolic parameters of the same name.
    ``F0``/``F1`` are the elementary-state data as expressions in the
    parameters ``W`` and ``Z``.
    """

    tag: str
    k: int | None = None
    l: int | None = None
    m: int | None = None
    n: int | None = None
    a: object = None
    b: object = None
    F0: object = None
    F1: object = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.tag not in FAMILY_TAGS:
            raise FamilyError(f"unknown family tag {self.tag!r}; expected one of {FAMILY_TAGS}")
        need = {"monomial": ("k", "l"), "special-monomial": ("k", "l", "m", "n")}.get(self.tag, ())
        for name in need:
            v = getattr(self, name)
            if v is None:
                raise FamilyError(f"family {self.tag} needs exponent {name}")
            if not isinstance(v, int) or isinstance(v, bool):
                raise FamilyError(f"exponent {name} must be an integer")
        if self.tag == "elementary" and (self.F0 is None or self.F1 is None):
            raise FamilyError("elementary family needs F0 and F1")

    @property
    def a_expr(self) -> RationalExpr:
        return _expr(self.a, "a")

    @property
    def b_expr(self) -> RationalExpr:
        return _expr(self.b, "b")

    def to_json(self) -> dict:
        d = {"name": self.tag}
        for k in ("k", "l", "m", "n"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        if self.tag in ("monomial", "special-monomial"):
            d["a"] = str(self.a_expr)
            d["b"] = str(self.b_expr)
        if self.tag == "elementary":
            d["F0"] = str(_expr(self.F0, "a"))
            d["F1"] = str(_expr(self.F1, "b"))
        return d


def light_cone() -> RationalExpr:
    """x_A w^A = w x + z y."""
    return var("w") * var("x") + var("z") * var("y")


def _power(base: RationalExpr, n: int) -> RationalExpr:
    return base ** n if n else ONE


def elementary(F0, F1) -> PotentialPair:
    """Theta_C = F_C(W^A) / (x_A w^A) with W^A = w^A / (x_B w^B)."""
    D = light_cone()
    sub = {"W": var("w") / D, "Z": var("z") / D}
    F0 = _expr(F0, "a").substitute(sub)
    F1 = _expr(F1, "b").substitute(sub)
    return PotentialPair(F0 / D, F1 / D)


def special_monomial(k: int, l: int, m: int, n: int, a=None, b=None) -> PotentialPair:
    D = light_cone()
    a = _expr(a, "a")
    b = _expr(b, "b")
    w, z = var("w"), var("z")
    t0 = a * _power(w, k) * _power(z, l) / _power(D, k + l + 1)
    t1 = b * _power(w, m) * _power(z, n) / _power(D, m + n + 1)
    return PotentialPair(t0, t1)


def make_family(spec: FamilySpec) -> PotentialPair:
    t = spec.tag
    if t == "flat":
        return PotentialPair(ZERO, ZERO)
    if t == "monomial":
        return PotentialPair(spec.a_expr * _power(var("x"), spec.l), spec.b_expr * _power(var("y"), spec.k))
    if t == "special-monomial":
        return special_monomial(spec.k, spec.l, spec.m, spec.n, spec.a_expr, spec.b_expr)
    if t == "elementary":
        return elementary(spec.F0, spec.F1)
    if t == "sparling-tod":
        # F_A = W_A = W^B eps_{BA} = (-Z, W)
        return elementary(-var("Z"), var("W"))
    if t == "eguchi-hanson":
        return PotentialPair.parse("-y*(2*w*x+z*y)/(w^2*(w*x+z*y)^2)", "-y^2/(w*(w*x+z*y)^2)")
    raise FamilyError(t)


# displayed metrics ---------------------------------------------------------

def _sym_add(g, i, j, c):
    # a term c * (e_i (x) e_j) contributes c to g_ij and to g_ji
    g[i][j] = g[i][j] + c
    g[j][i] = g[j][i] + c


def _flat_part():
    g = [[ZERO] * 4 for _ in range(4)]
    _sym_add(g, 0, 2, ONE)  # dw (x) dx
    _sym_add(g, 1, 3, ONE)  # dz (x) dy
    return g


def displayed_metric(spec: FamilySpec) -> list[list[RationalExpr]]:
    """Closed-form metric of the monomial / special-monomial families.

    monomial:           dw.dx + dz.dy + (b k y^{k-1} - a l x^{l-1}) dw.dz
    special-monomial:   dw.dx + dz.dy + (P dw + Q dz) (x) (w dz - z dw)
                        P = a(k+l+1) w^k z^l / D^{k+l+2}, Q likewise with (b, m, n).
    """
    x, y, w, z = var("x"), var("y"), var("w"), var("z")
    g = _flat_part()
    if spec.tag == "monomial":
        a, b, k, l = spec.a_expr, spec.b_expr, spec.k, spec.l
        c = b * k * _power(y, k - 1) - a * l * _power(x, l - 1)
        _sym_add(g, 0, 1, c)
        return g
    if spec.tag == "special-monomial":
        D = light_cone()
        a, b, k, l, m, n = spec.a_expr, spec.b_expr, spec.k, spec.l, spec.m, spec.n
        P = a * (k + l + 1) * _power(w, k) * _power(z, l) / _power(D, k + l + 2)
        Q = b * (m + n + 1) * _power(w, m) * _power(z, n) / _power(D, m + n + 2)
        # (P dw + Q dz) (x) (w dz - z dw)
        _sym_add(g, 0, 1, P * w)
        _sym_add(g, 0, 0, -(P * z))
        _sym_add(g, 1, 1, Q * w)
        _sym_add(g, 1, 0, -(Q * z))
        return g
    raise FamilyError("displayed metric only for monomial and special-monomial families")


def family_metric_check(spec: FamilySpec) -> dict:
    g = build_geometry(make_family(spec)).metric
    ref = displayed_metric(spec)
    diff = [[g[i][j] - ref[i][j] for j in range(4)] for i in range(4)]
    return {"match": all(d.is_zero() for row in diff for d in row), "difference": diff}


# hyper-Kaehler sub-family ---------------------------------------------------

def is_hk_parameters(spec: FamilySpec) -> bool:
    if spec.tag != "special-monomial":
        return False
    return (spec.a_expr + spec.b_expr).is_zero() and spec.l == spec.n + 1 and spec.k == spec.m - 1


def hk_scalar_unnormalised(spec: FamilySpec) -> ScalarPotential:
    """-a w^k z^{l-1} D^{-(k+l)}, the scalar without the 1/(k+l) factor."""
    D = light_cone()
    return ScalarPotential(-spec.a_expr * _power(var("w"), spec.k) * _power(var("z"), spec.l - 1) / _power(D, spec.k + spec.l))


def hk_scalar(spec: FamilySpec) -> ScalarPotential:
    """Scalar with Theta^A = d^A Theta for the sub-family: the unnormalised one over (k+l)."""
    s = hk_scalar_unnormalised(spec).theta
    return ScalarPotential(s / const(spec.k + spec.l))


def khl_invariant(spec: FamilySpec) -> RationalExpr:
    """C_ABCD C^ABCD of the monomial family in closed form.

    (1/2) a b k(k-1)(k-2) l(l-1)(l-2) x^{l-3} y^{k-3}
    """
    k, l = spec.k, spec.l
    coef = const(k * (k - 1) * (k - 2) * l * (l - 1) * (l - 2)) / 2
    return spec.a_expr * spec.b_expr * coef * _power(var("x"), l - 3) * _power(var("y"), k - 3)


# Euclidean slice ------------------------------------------------------------

def euclidean_slice_points(n: int, seed: int = 0) -> list[NumericPoint]:
    """Points with w = conj(x), z = conj(y)."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        x, y = random_complex(rng), random_complex(rng)
        out.append(NumericPoint({"w": x.conjugate(), "z": y.conjugate(), "x": x, "y": y}))
    return out


def euclidean_reality_defect(theta: PotentialPair, points: list[NumericPoint], seed: int = 0) -> float:
    """Largest |Im q| / |q| of the line element q = g(v, v) over real tangent vectors.

    On the slice a real tangent vector has dw = conj(dx), dz = conj(dy).
    Zero means the restricted metric is real.
    """
    g = build_geometry(theta).metric
    rng = random.Random(seed)
    worst = 0.0
    for pt in points:
        G = [[g[i][j].eval_numeric(pt) if g[i][j] else 0j for j in range(4)] for i in range(4)]
        for _ in range(4):
            al, be = random_complex(rng), random_complex(rng)
            v = [al.conjugate(), be.conjugate(), al, be]
            q = sum(G[i][j] * v[i] * v[j] for i in range(4) for j in range(4))
            worst = max(worst, abs(q.imag) / abs(q))
    return worst
