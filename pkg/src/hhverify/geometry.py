"""Potential pair -> tetrad, metric, two-forms, Lee form, connection, curvature.

Index bookkeeping used throughout:

* coordinates ``x^A = (y, -x)`` and ``w^A = (w, z)``, so ``d_0 = d/dy`` and
  ``d_1 = -d/dx`` for ``d_A = d/dx^A``;
* ``d^A = eps^{AB} d_B`` is what ``d/dx_A`` means (same for ``w``);
* ``Theta^A = eps^{AB} Theta_B``, i.e. ``Theta^0 = Theta_1`` and
  ``Theta^1 = -Theta_0``;
* primed dyad ``o^{A'} = (1, 0)``, hence ``o_{A'} = (0, 1)``.

The field equation implemented is

    R_C = d^A d_{w^A} Theta_C + (d_A Theta_B) d^A d^B Theta_C,

whose vanishing is equivalent to the Lax integrability condition (see
:func:`lax_commutator`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from .expr import ONE, ZERO, RationalExpr, const, parse_expr, var
from .forms import (
    DifferentialForm,
    VectorFieldOperator,
    commutator,
    evaluate,
    exterior_d,
    wedge,
)
from .spinors import EPS, SpinorField, symmetrize

__all__ = [
    "PotentialPair",
    "ScalarPotential",
    "GeometryBundle",
    "build_geometry",
    "dX",
    "dW",
    "dXup",
    "dWup",
    "hypereq_residual",
    "special_case_residuals",
    "lax_commutator",
    "lax_coefficients",
    "lax_identity_residual",
    "eq_system_residuals",
    "nijenhuis",
    "maxwell_check",
    "lee_structure_residual",
    "structure_equation_residual",
    "curvature_decompose",
    "weyl_invariant",
    "wave_operator",
    "inverse_matrix",
    "SingularSystemError",
]

HALF = const(1) / 2
O_LOW = (0, 1)   # o_{A'}
O_UP = (1, 0)    # o^{A'}

_W = {0: "w", 1: "z"}


class SingularSystemError(ArithmeticError):
    """Raised when an exact linear solve meets a singular matrix."""


# coordinate derivatives --------------------------------------------------

def dX(e: RationalExpr, A: int) -> RationalExpr:
    """d/dx^A with x^A = (y, -x)."""
    return e.diff("y") if A == 0 else -e.diff("x")


def dW(e: RationalExpr, A: int) -> RationalExpr:
    """d/dw^A with w^A = (w, z)."""
    return e.diff(_W[A])


def dXup(e: RationalExpr, A: int) -> RationalExpr:
    """d/dx_A = eps^{AB} d/dx^B."""
    return dX(e, 1) if A == 0 else -dX(e, 0)


def dWup(e: RationalExpr, A: int) -> RationalExpr:
    return dW(e, 1) if A == 0 else -dW(e, 0)


def dx_form(A: int) -> DifferentialForm:
    return DifferentialForm(1, {(3,): 1}) if A == 0 else DifferentialForm(1, {(2,): -1})


def dw_form(A: int) -> DifferentialForm:
    return DifferentialForm(1, {(A,): 1})


def dx_vector(A: int) -> VectorFieldOperator:
    return VectorFieldOperator((0, 0, 0, 1) if A == 0 else (0, 0, -1, 0))


def dw_vector(A: int) -> VectorFieldOperator:
    return VectorFieldOperator((1, 0, 0, 0) if A == 0 else (0, 1, 0, 0))


# potentials ---------------------------------------------------------------

@dataclass(frozen=True)
class PotentialPair:
    """Potentials Theta_0, Theta_1 (lower index)."""

    theta0: RationalExpr
    theta1: RationalExpr

    def __post_init__(self):
        object.__setattr__(self, "theta0", RationalExpr.coerce(self.theta0))
        object.__setattr__(self, "theta1", RationalExpr.coerce(self.theta1))

    @classmethod
    def parse(cls, t0: str, t1: str, params=None) -> PotentialPair:
        return cls(parse_expr(t0, params), parse_expr(t1, params))

    @classmethod
    def from_upper(cls, u0, u1) -> PotentialPair:
        # Theta_A = Theta^B eps_{BA}: Theta_0 = -Theta^1, Theta_1 = Theta^0
        return cls(-RationalExpr.coerce(u1), RationalExpr.coerce(u0))

    def lower(self, A: int) -> RationalExpr:
        return self.theta0 if A == 0 else self.theta1

    def upper(self, A: int) -> RationalExpr:
        return self.theta1 if A == 0 else -self.theta0

    def __add__(self, o: PotentialPair) -> PotentialPair:
        return PotentialPair(self.theta0 + o.theta0, self.theta1 + o.theta1)

    def scale(self, c) -> PotentialPair:
        c = RationalExpr.coerce(c)
        return PotentialPair(self.theta0 * c, self.theta1 * c)

    def is_zero(self) -> bool:
        return self.theta0.is_zero() and self.theta1.is_zero()

    def to_json(self) -> dict:
        return {"theta0": str(self.theta0), "theta1": str(self.theta1)}


@dataclass(frozen=True)
class ScalarPotential:
    theta: RationalExpr

    def __post_init__(self):
        object.__setattr__(self, "theta", RationalExpr.coerce(self.theta))


class Jet:
    """Memoised x/w-derivatives of Theta_C.

    ``low(C, ops)`` with ``ops`` a tuple of ('x', A) / ('w', A) pairs returns
    the corresponding mixed partial of Theta_C.  Partials commute, so the
    key is the sorted op tuple.
    """

    def __init__(self, theta: PotentialPair):
        self.theta = theta
        self._memo: dict = {}

    def low(self, C: int, *ops) -> RationalExpr:
        key = (C,) + tuple(sorted(ops))
        r = self._memo.get(key)
        if r is not None:
            return r
        if not ops:
            r = self.theta.lower(C)
        else:
            ops_sorted = tuple(sorted(ops))
            head, rest = ops_sorted[-1], ops_sorted[:-1]
            base = self.low(C, *rest)
            r = dX(base, head[1]) if head[0] == "x" else dW(base, head[1])
        self._memo[key] = r
        return r

    def up(self, C: int, *ops) -> RationalExpr:
        return self.low(1, *ops) if C == 0 else -self.low(0, *ops)


# linear algebra over the rational-function field -----------------------

def _pivot_rank(e: RationalExpr):
    if not e:
        return None
    if e.is_constant():
        return (0, 0)
    return (1, e.nterms() + len(e.den))


def solve_linear(M: list[list[RationalExpr]], rhs: list[list[RationalExpr]]) -> list[list[RationalExpr]]:
    """Solve M X = RHS exactly by Gauss-Jordan elimination.

    ``rhs`` is a list of columns; returns the list of solution columns.
    """
    n = len(M)
    A = [list(row) + [col[i] for col in rhs] for i, row in enumerate(M)]
    ncol = n + len(rhs)
    for c in range(n):
        best = None
        for r in range(c, n):
            k = _pivot_rank(A[r][c])
            if k is not None and (best is None or k < best[0]):
                best = (k, r)
        if best is None:
            raise SingularSystemError("singular linear system")
        r = best[1]
        A[c], A[r] = A[r], A[c]
        piv = A[c][c]
        if piv != ONE:
            inv = ONE / piv
            A[c] = [v * inv if v else v for v in A[c]]
        for r2 in range(n):
            if r2 == c:
                continue
            f = A[r2][c]
            if not f:
                continue
            A[r2] = [A[r2][j] - f * A[c][j] if A[c][j] else A[r2][j] for j in range(ncol)]
    return [[A[i][n + k] for i in range(n)] for k in range(len(rhs))]


def inverse_matrix(M: list[list[RationalExpr]]) -> list[list[RationalExpr]]:
    n = len(M)
    eye = [[ONE if i == k else ZERO for i in range(n)] for k in range(n)]
    cols = solve_linear(M, eye)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def determinant(M: list[list[RationalExpr]]) -> RationalExpr:
    n = len(M)
    A = [list(r) for r in M]
    det = ONE
    for c in range(n):
        best = None
        for r in range(c, n):
            k = _pivot_rank(A[r][c])
            if k is not None and (best is None or k < best[0]):
                best = (k, r)
        if best is None:
            return ZERO
        r = best[1]
        if r != c:
            A[c], A[r] = A[r], A[c]
            det = -det
        piv = A[c][c]
        det = det * piv
        for r2 in range(c + 1, n):
            f = A[r2][c]
            if not f:
                continue
            q = f / piv
            A[r2] = [A[r2][j] - q * A[c][j] if A[c][j] else A[r2][j] for j in range(n)]
    return det


# the geometry bundle ---------------------------------------------------------

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
SYM_PAIRS = [(0, 0), (0, 1), (1, 1)]


class GeometryBundle:
    """All frame-level objects derived from one potential pair.

    Everything is computed lazily and cached; instances are never mutated
    after a property has been computed, so sharing between threads is safe
    once warmed (and merely duplicates work otherwise).
    """

    def __init__(self, theta: PotentialPair, connection: str = "closed"):
        self.theta = theta
        self.jet = Jet(theta)
        self.connection_variant = connection

    # frame ------------------------------------------------------------
    @cached_property
    def dtheta_up(self) -> list[list[RationalExpr]]:
        """dtheta_up[A][B] = d_B Theta^A."""
        return [[self.jet.up(A, ("x", B)) for B in (0, 1)] for A in (0, 1)]

    @cached_property
    def tetrad(self) -> dict[tuple[int, int], DifferentialForm]:
        e = {}
        for A in (0, 1):
            f = dx_form(A)
            for B in (0, 1):
                c = self.dtheta_up[A][B]
                if c:
                    f = f + dw_form(B).scale(c)
            e[(A, 0)] = f
            e[(A, 1)] = dw_form(A)
        return e

    @cached_property
    def frame(self) -> dict[tuple[int, int], VectorFieldOperator]:
        nab = {}
        for A in (0, 1):
            nab[(A, 0)] = dx_vector(A)
            v = dw_vector(A)
            for B in (0, 1):
                c = self.dtheta_up[B][A]   # d_A Theta^B
                if c:
                    v = v - dx_vector(B).scale(c)
            nab[(A, 1)] = v
        return nab

    def duality_residual(self) -> list[RationalExpr]:
        out = []
        for (A, Ap), e in self.tetrad.items():
            for (B, Bp), v in self.frame.items():
                val = evaluate(e, [v])
                target = ONE if (A, Ap) == (B, Bp) else ZERO
                out.append(val - target)
        return out

    @cached_property
    def metric(self) -> list[list[RationalExpr]]:
        comps = {k: [f[(mu,)] for mu in range(4)] for k, f in self.tetrad.items()}
        g = [[ZERO] * 4 for _ in range(4)]
        for (A, Ap), (B, Bp) in itertools.product(self.tetrad, repeat=2):
            s = EPS[A][B] * EPS[Ap][Bp]
            if not s:
                continue
            ea, eb = comps[(A, Ap)], comps[(B, Bp)]
            for mu in range(4):
                if not ea[mu]:
                    continue
                for nu in range(4):
                    if eb[nu]:
                        g[mu][nu] = g[mu][nu] + (ea[mu] * eb[nu]).scale(s)
        return g

    @cached_property
    def metric_inverse(self) -> list[list[RationalExpr]]:
        return inverse_matrix(self.metric)

    @cached_property
    def det_g(self) -> RationalExpr:
        return determinant(self.metric)

    # two-forms ------------------------------------------------------------
    @cached_property
    def sigma_primed(self) -> dict[tuple[int, int], DifferentialForm]:
        e = self.tetrad
        out = {}
        for Ap, Bp in SYM_PAIRS:
            f = DifferentialForm(2)
            for A, B in ((0, 1), (1, 0)):
                f = f + wedge(e[(A, Ap)], e[(B, Bp)]).scale(EPS[A][B])
            out[(Ap, Bp)] = f.scale(HALF)
        return out

    @cached_property
    def sigma_unprimed(self) -> dict[tuple[int, int], DifferentialForm]:
        e = self.tetrad
        out = {}
        for A, B in SYM_PAIRS:
            f = DifferentialForm(2)
            for Ap, Bp in ((0, 1), (1, 0)):
                f = f + wedge(e[(A, Ap)], e[(B, Bp)]).scale(EPS[Ap][Bp])
            out[(A, B)] = f.scale(HALF)
        return out

    def sigma(self, primed: bool, i: int, j: int) -> DifferentialForm:
        d = self.sigma_primed if primed else self.sigma_unprimed
        return d[(min(i, j), max(i, j))]

    # Lee form -----------------------------------------------------------
    @cached_property
    def lee_components(self) -> tuple[RationalExpr, RationalExpr]:
        """A_A = d_A d_B Theta^B, the dw^A coefficients of the Lee form."""
        return tuple(
            self.jet.up(0, ("x", A), ("x", 0)) + self.jet.up(1, ("x", A), ("x", 1)) for A in (0, 1)
        )

    @cached_property
    def lee_form(self) -> DifferentialForm:
        a0, a1 = self.lee_components
        return DifferentialForm(1, {(0,): a0, (1,): a1})

    @cached_property
    def lee_spinor(self) -> SpinorField:
        """A_{AA'} = o_{A'} A_A."""
        a = self.lee_components
        return SpinorField.from_function("_A _A'", lambda A, Ap: a[A] * O_LOW[Ap])

    # connection -----------------------------------------------------------
    @cached_property
    def second_x(self) -> SpinorField:
        """S_{ABC} = d_B d_C Theta_A."""
        return SpinorField.from_function("_A _B _C", lambda A, B, C: self.jet.low(A, ("x", B), ("x", C)))

    @cached_property
    def gamma_unprimed(self) -> SpinorField:
        """Gamma_{AA'BC}."""
        S = symmetrize(self.second_x)
        Sraw = self.second_x
        a = self.lee_components
        sixth = const(1) / 6
        variant = self.connection_variant

        def comp(A, Ap, B, C):
            if not O_LOW[Ap]:
                return ZERO
            if variant == "tabulated":
                return (S[A, B, C] + Sraw[A, B, C]).scale(-HALF.constant_value())
            t = (a[C] * EPS[A][B] + a[B] * EPS[A][C]) * HALF
            return S[A, B, C] - t * sixth

        return SpinorField.from_function("_A _A' _B _C", comp)

    @cached_property
    def gamma_primed(self) -> SpinorField:
        """Gamma_{AA'B'C'}."""
        a = self.lee_components
        coef = HALF if self.connection_variant != "tabulated" else const(-1)

        def comp(A, Ap, Bp, Cp):
            s = O_LOW[Bp] * EPS[Cp][Ap] + O_LOW[Cp] * EPS[Bp][Ap]
            if not s:
                return ZERO
            return a[A] * coef * HALF * s

        return SpinorField.from_function("_A _A' _B' _C'", comp)

    def _connection_forms(self, gam: SpinorField) -> dict[tuple[int, int], DifferentialForm]:
        """Gamma^P_Q one-forms from Gamma_{AA'PQ} e^{AA'} with P raised."""
        low = {}
        for P_, Q_ in itertools.product((0, 1), repeat=2):
            f = DifferentialForm(1)
            for (A, Ap), e in self.tetrad.items():
                c = gam[A, Ap, P_, Q_]
                if c:
                    f = f + e.scale(c)
            low[(P_, Q_)] = f
        up = {}
        for P_, Q_ in itertools.product((0, 1), repeat=2):
            f = DifferentialForm(1)
            for C in (0, 1):
                s = EPS[P_][C]
                if s:
                    f = f + low[(C, Q_)].scale(s)
            up[(P_, Q_)] = f
        return up

    @cached_property
    def conn_unprimed(self) -> dict[tuple[int, int], DifferentialForm]:
        return self._connection_forms(self.gamma_unprimed)

    @cached_property
    def conn_primed(self) -> dict[tuple[int, int], DifferentialForm]:
        return self._connection_forms(self.gamma_primed)

    # Weyl spinor from third derivatives -------------------------------
    @cached_property
    def weyl_direct(self) -> SpinorField:
        raw = SpinorField.from_function(
            "_A _B _C _D", lambda A, B, C, D: self.jet.low(D, ("x", A), ("x", B), ("x", C)))
        return symmetrize(raw)

    # curvature ------------------------------------------------------------
    @cached_property
    def sigma_basis_inverse(self) -> list[list[RationalExpr]]:
        basis = [self.sigma_unprimed[p] for p in SYM_PAIRS] + [self.sigma_primed[p] for p in SYM_PAIRS]
        M = [[b[pair] for b in basis] for pair in PAIRS]
        return inverse_matrix(M)

    def sigma_coefficients(self, F: DifferentialForm) -> list[RationalExpr]:
        """Coefficients of a 2-form on (S^00, S^01, S^11, S^0'0', S^0'1', S^1'1')."""
        Minv = self.sigma_basis_inverse
        r = [F[pair] for pair in PAIRS]
        out = []
        for i in range(6):
            acc = ZERO
            for j in range(6):
                if Minv[i][j] and r[j]:
                    acc = acc + Minv[i][j] * r[j]
            out.append(acc)
        return out

    def curvature_forms(self, primed: bool) -> dict[tuple[int, int], DifferentialForm]:
        G = self.conn_primed if primed else self.conn_unprimed
        out = {}
        for P_, Q_ in itertools.product((0, 1), repeat=2):
            R = exterior_d(G[(P_, Q_)])
            for C in (0, 1):
                R = R + wedge(G[(P_, C)], G[(C, Q_)])
            out[(P_, Q_)] = R
        return out

    @cached_property
    def curvature(self) -> dict:
        return _decompose(self)


def _decompose(geo: GeometryBundle) -> dict:
    res = {}
    for primed in (False, True):
        Rf = geo.curvature_forms(primed)
        # K^P_{Q..} on own-kind basis and Phi^P_{Q..} on the other kind
        own = {}
        other = {}
        for (P_, Q_), F in Rf.items():
            c = geo.sigma_coefficients(F)
            cu, cp = c[:3], c[3:]
            mine, theirs = (cp, cu) if primed else (cu, cp)
            own[(P_, Q_)] = (mine[0], mine[1] * HALF, mine[2])
            other[(P_, Q_)] = (theirs[0], theirs[1] * HALF, theirs[2])

        def sym_get(t, C, D):
            return t[C + D]

        def lowered(table):
            def comp(P_, Q_, C, D):
                acc = ZERO
                for E in (0, 1):
                    s = EPS[E][P_]
                    if s:
                        acc = acc + sym_get(table[(E, Q_)], C, D).scale(s)
                return acc
            return comp

        K = SpinorField.from_function(("_A _B _C _D" if not primed else "_A' _B' _C' _D'"), lowered(own))
        Ph = SpinorField.from_function(("_A _B _C' _D'" if not primed else "_A' _B' _C _D"), lowered(other))
        weyl = symmetrize(K)
        trace = ZERO
        for A, B, C, D in itertools.product((0, 1), repeat=4):
            s = EPS[A][C] * EPS[B][D]
            if s and K[A, B, C, D]:
                trace = trace + K[A, B, C, D].scale(s)
        R = trace.scale(6)
        key = "primed" if primed else "unprimed"
        res[key] = {"weyl": weyl, "R": R, "phi": Ph, "raw": K}
    return res


def build_geometry(theta: PotentialPair, connection: str = "closed") -> GeometryBundle:
    # "tabulated" is an older connection table kept as a negative control;
    # it does not satisfy the structure equations
    if connection not in ("closed", "tabulated"):
        raise ValueError("connection must be 'closed' or 'tabulated'")
    return GeometryBundle(theta, connection)


# residual operations ------------------------------------------------------

def _geo(theta_or_geo) -> GeometryBundle:
    if isinstance(theta_or_geo, GeometryBundle):
        return theta_or_geo
    return build_geometry(theta_or_geo)


def special_case_residuals(theta) -> tuple[tuple[RationalExpr, RationalExpr], tuple[RationalExpr, RationalExpr]]:
    """(linear pair, nonlinear pair) of the field equation."""
    J = _geo(theta).jet
    lin = []
    non = []
    for C in (0, 1):
        # d^A d_{w^A} Theta_C = eps^{AB} d_B d_{w^A} Theta_C
        l_ = J.low(C, ("x", 1), ("w", 0)) - J.low(C, ("x", 0), ("w", 1))
        n_ = ZERO
        for A, B in itertools.product((0, 1), repeat=2):
            dth = J.low(B, ("x", A))
            if not dth:
                continue
            # d^A d^B = eps^{AE} eps^{BF} d_E d_F
            acc = ZERO
            for E, F in itertools.product((0, 1), repeat=2):
                s = EPS[A][E] * EPS[B][F]
                if s:
                    acc = acc + J.low(C, ("x", E), ("x", F)).scale(s)
            if acc:
                n_ = n_ + dth * acc
        lin.append(l_)
        non.append(n_)
    return (lin[0], lin[1]), (non[0], non[1])


def hypereq_residual(theta) -> tuple[RationalExpr, RationalExpr]:
    (l0, l1), (n0, n1) = special_case_residuals(theta)
    return l0 + n0, l1 + n1


def eq_system_residuals(theta) -> dict[str, dict[tuple[int, int], VectorFieldOperator]]:
    nab = _geo(theta).frame
    eq1, eq2, eq3 = {}, {}, {}
    for A, B in itertools.product((0, 1), repeat=2):
        eq1[(A, B)] = commutator(nab[(A, 0)], nab[(B, 0)])
        eq2[(A, B)] = commutator(nab[(A, 0)], nab[(B, 1)]) + commutator(nab[(A, 1)], nab[(B, 0)])
        eq3[(A, B)] = commutator(nab[(A, 1)], nab[(B, 1)])
    return {"eq1": eq1, "eq2": eq2, "eq3": eq3}


def lax_commutator(theta) -> VectorFieldOperator:
    """[L_0, L_1] with L_A = nabla_{A0'} - lam nabla_{A1'}, lam a formal parameter."""
    nab = _geo(theta).frame
    lam = var("lam")
    L0 = nab[(0, 0)] - nab[(0, 1)].scale(lam)
    L1 = nab[(1, 0)] - nab[(1, 1)].scale(lam)
    return commutator(L0, L1)


def lax_coefficients(op: VectorFieldOperator) -> dict[int, VectorFieldOperator]:
    """Split an operator polynomial in lam into its lam^k coefficient operators."""
    from .expr.poly import gen_index

    k = gen_index("lam")
    per: dict[int, list] = {}
    for mu, c in enumerate(op.coeffs):
        for p, cc in coefficients_in(c, k).items():
            per.setdefault(p, [ZERO] * 4)[mu] = cc
    return {p: VectorFieldOperator(v) for p, v in sorted(per.items())}


def coefficients_in(e: RationalExpr, k: int) -> dict[int, RationalExpr]:
    """Coefficients of powers of generator ``k`` (must not occur in the denominator)."""
    from .expr import atoms as AT
    from .expr import poly as P

    if any(AT.atom_support(a) >> k & 1 for a, _ in e.den):
        raise ValueError("generator occurs in a denominator")
    out = {}
    for p, sub in P.p_collect(e.num, k).items():
        r = RationalExpr(sub, e.den)
        out[p] = _renorm(r)
    return out


def _renorm(r: RationalExpr) -> RationalExpr:
    # a slice of a canonical numerator may share factors with the denominator
    from .expr.rational import _cancel

    if not r.den or not r.num:
        return r
    num, dt = _cancel(dict(r.num), dict(r.den), [a for a, _ in r.den])
    return RationalExpr(num, dt)


def nijenhuis(theta, Ap: int, Bp: int) -> dict[tuple[int, int], VectorFieldOperator]:
    """N^{A'}_{B'}(d_i, d_j) for coordinate pairs i < j."""
    geo = _geo(theta)
    J = endomorphism(geo, Ap, Bp)

    def apply(v: VectorFieldOperator) -> VectorFieldOperator:
        return VectorFieldOperator(
            sum((J[m][n] * v.coeffs[n] for n in range(4) if J[m][n] and v.coeffs[n]), ZERO) for m in range(4))

    basis = [VectorFieldOperator([1 if i == k else 0 for i in range(4)]) for k in range(4)]
    out = {}
    for i, j in PAIRS:
        X, Y = basis[i], basis[j]
        JX, JY = apply(X), apply(Y)
        N = commutator(JX, JY) - apply(commutator(JX, Y)) - apply(commutator(X, JY))
        out[(i, j)] = N
    return out


def endomorphism(geo: GeometryBundle, Ap: int, Bp: int) -> list[list[RationalExpr]]:
    """J^{A'}_{B'} = e^{AA'} (x) nabla_{AB'} as a matrix J[mu][nu]."""
    J = [[ZERO] * 4 for _ in range(4)]
    for A in (0, 1):
        e = geo.tetrad[(A, Ap)]
        v = geo.frame[(A, Bp)]
        for mu in range(4):
            if not v.coeffs[mu]:
                continue
            for nu in range(4):
                c = e[(nu,)]
                if c:
                    J[mu][nu] = J[mu][nu] + v.coeffs[mu] * c
    return J


def mat_mul(A, B):
    n = len(A)
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if not A[i][k]:
                continue
            for j in range(n):
                if B[k][j]:
                    out[i][j] = out[i][j] + A[i][k] * B[k][j]
    return out


def lee_structure_residual(theta) -> dict[tuple[int, int], DifferentialForm]:
    geo = _geo(theta)
    A = geo.lee_form
    return {k: exterior_d(S) + wedge(A, S) for k, S in geo.sigma_primed.items()}


def structure_equation_residual(theta, connection: str | None = None) -> dict[tuple[int, int], DifferentialForm]:
    """de^{AA'} - e^{BA'} ^ Gamma^A_B - e^{AB'} ^ Gamma^{A'}_{B'}."""
    geo = theta if isinstance(theta, GeometryBundle) and connection is None else build_geometry(
        theta.theta if isinstance(theta, GeometryBundle) else theta, connection or "closed")
    e = geo.tetrad
    Gu, Gp = geo.conn_unprimed, geo.conn_primed
    out = {}
    for A, Ap in e:
        r = exterior_d(e[(A, Ap)])
        for B in (0, 1):
            r = r - wedge(e[(B, Ap)], Gu[(A, B)])
            r = r - wedge(e[(A, B)], Gp[(Ap, B)])
        out[(A, Ap)] = r
    return out


def curvature_decompose(theta) -> tuple[SpinorField, RationalExpr, SpinorField, SpinorField]:
    geo = _geo(theta)
    cu = geo.curvature["unprimed"]
    cp = geo.curvature["primed"]
    return cu["weyl"], cu["R"], cu["phi"], cp["weyl"]


def weyl_invariant_of(C: SpinorField) -> RationalExpr:
    """C_{ABCD} C^{ABCD} with all indices raised by eps."""
    acc = ZERO
    for A, B, C_, D in itertools.product((0, 1), repeat=4):
        c = C[A, B, C_, D]
        if not c:
            continue
        # C^{ABCD} = eps^{AP} eps^{BQ} eps^{CR} eps^{DS} C_{PQRS}; eps^{AP} != 0 only for P = 1-A
        P_, Q_, R_, S_ = 1 - A, 1 - B, 1 - C_, 1 - D
        s = EPS[A][P_] * EPS[B][Q_] * EPS[C_][R_] * EPS[D][S_]
        up = C[P_, Q_, R_, S_]
        if up:
            acc = acc + (c * up).scale(s)
    return acc


def weyl_invariant(theta) -> RationalExpr:
    return weyl_invariant_of(_geo(theta).weyl_direct)


def maxwell_check(theta) -> dict:
    """phi_{AB}, the SD residual phi~_{A'B'} and the Gauduchon quantities."""
    geo = _geo(theta)
    F = exterior_d(geo.lee_form)
    nab = geo.frame
    Fs = {}
    for (A, Ap), (B, Bp) in itertools.product(nab, repeat=2):
        Fs[(A, Ap, B, Bp)] = evaluate(F, [nab[(A, Ap)], nab[(B, Bp)]]) if F.comps else ZERO

    def phi(A, B):
        acc = ZERO
        for Ap, Bp in ((0, 1), (1, 0)):
            acc = acc + Fs[(A, Ap, B, Bp)].scale(EPS[Ap][Bp])
        return acc * HALF

    def phit(Ap, Bp):
        acc = ZERO
        for A, B in ((0, 1), (1, 0)):
            acc = acc + Fs[(A, Ap, B, Bp)].scale(EPS[A][B])
        return acc * HALF

    ginv = geo.metric_inverse
    Alow = [geo.lee_form[(mu,)] for mu in range(4)]
    Aup = [sum((ginv[m][n] * Alow[n] for n in range(4) if ginv[m][n] and Alow[n]), ZERO) for m in range(4)]
    norm = sum((Alow[m] * Aup[m] for m in range(4) if Alow[m] and Aup[m]), ZERO)
    names = ("w", "z", "x", "y")
    div = sum((Aup[m].diff(names[m]) for m in range(4) if Aup[m]), ZERO)
    return {
        "F": F,
        "phi": SpinorField.from_function("_A _B", phi),
        "phi_tilde": SpinorField.from_function("_A' _B'", phit),
        "A_up": Aup,
        "A_norm": norm,
        "A_divergence": div,
    }


def wave_operator(theta, h) -> RationalExpr:
    """A^a d_a h + nabla^A_{1'} nabla_{A0'} h."""
    geo = _geo(theta)
    h = RationalExpr.coerce(h)
    ginv = geo.metric_inverse
    Alow = [geo.lee_form[(mu,)] for mu in range(4)]
    names = ("w", "z", "x", "y")
    dh = [h.diff(n) for n in names]
    acc = ZERO
    for mu in range(4):
        for nu in range(4):
            if ginv[mu][nu] and Alow[nu] and dh[mu]:
                acc = acc + ginv[mu][nu] * Alow[nu] * dh[mu]
    nab = geo.frame
    for A in (0, 1):
        inner = nab[(A, 0)](h)
        for B in (0, 1):
            s = EPS[A][B]
            if s and inner:
                acc = acc + nab[(B, 1)](inner).scale(s)
    return acc


def wave_operator_coordinate_form(theta, h) -> RationalExpr:
    """d^2 h/dx_A dw^A + (d^A d^B Theta_B) d_A h + (d^B Theta^A) d_A d_B h."""
    J = _geo(theta).jet
    h = RationalExpr.coerce(h)
    acc = ZERO
    for A in (0, 1):
        acc = acc + dXup(dW(h, A), A)
    for A in (0, 1):
        coef = ZERO
        for B in (0, 1):
            for E, F in itertools.product((0, 1), repeat=2):
                s = EPS[A][E] * EPS[B][F]
                if s:
                    coef = coef + J.low(B, ("x", E), ("x", F)).scale(s)
        if coef:
            acc = acc + coef * dX(h, A)
    for A, B in itertools.product((0, 1), repeat=2):
        coef = ZERO
        for F in (0, 1):
            s = EPS[B][F]
            if s:
                coef = coef + J.up(A, ("x", F)).scale(s)
        if coef:
            acc = acc + coef * dX(dX(h, A), B)
    return acc


def laplacian(theta, h) -> RationalExpr:
    """d_a (g^{ab} d_b h), the Laplace-Beltrami operator when det g = 1."""
    geo = _geo(theta)
    ginv = geo.metric_inverse
    names = ("w", "z", "x", "y")
    h = RationalExpr.coerce(h)
    dh = [h.diff(n) for n in names]
    acc = ZERO
    for a in range(4):
        v = sum((ginv[a][b] * dh[b] for b in range(4) if ginv[a][b] and dh[b]), ZERO)
        if v:
            acc = acc + v.diff(names[a])
    return acc


def lee_derivative(theta, h) -> RationalExpr:
    """A^a d_a h."""
    geo = _geo(theta)
    ginv = geo.metric_inverse
    Alow = [geo.lee_form[(mu,)] for mu in range(4)]
    names = ("w", "z", "x", "y")
    h = RationalExpr.coerce(h)
    acc = ZERO
    for mu in range(4):
        d = h.diff(names[mu])
        if not d:
            continue
        for nu in range(4):
            if ginv[mu][nu] and Alow[nu]:
                acc = acc + ginv[mu][nu] * Alow[nu] * d
    return acc



def lax_identity_residual(theta) -> VectorFieldOperator:
    """[L_0, L_1] - (eq1 - lam eq2 + lam^2 eq3) for the (0, 1) components."""
    lam = var("lam")
    eqs = eq_system_residuals(theta)
    combo = eqs["eq1"][(0, 1)] - eqs["eq2"][(0, 1)].scale(lam) + eqs["eq3"][(0, 1)].scale(lam * lam)
    return lax_commutator(theta) - combo
