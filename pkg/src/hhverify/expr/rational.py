"""Exact rational functions with factored denominators.

``RationalExpr`` stores a numerator polynomial over Q(i) and a denominator
given as a sorted tuple of ``(atom_id, exponent)`` pairs, where atoms are
the interned monic irreducible factors of :mod:`hhverify.expr.atoms`.  The
numerator is never divisible by any denominator atom, which makes the
representation canonical: two expressions are equal iff their numerators
and denominator tuples are equal, and an expression is zero iff its
numerator has no terms.
"""
from __future__ import annotations

from gmpy2 import mpq

from . import atoms as AT
from . import poly as P
from .coeffs import GaussianRational, coerce, to_complex

__all__ = ["RationalExpr", "PoleError", "DivisionByZeroError", "const", "var", "ZERO", "ONE"]


class DivisionByZeroError(ZeroDivisionError):
    """Division by an identically-zero expression."""


class PoleError(ArithmeticError):
    """Numeric evaluation too close to a pole."""


POLE_TOL = 1e-12


def _strip_atom(num: dict, aid: int, emax: int) -> tuple[dict, int]:
    """Divide ``num`` by ``atom^j`` for the largest ``j <= emax`` possible."""
    if emax <= 0 or not num:
        return num, 0
    k = AT.atom_var(aid)
    if k is not None:
        shift = P.FIELD * k
        j = min((m >> shift) & P.EXP_MASK for m in num)
        j = min(j, emax)
        if j:
            off = j << shift
            num = {m - off: c for m, c in num.items()}
        return num, j
    ap = AT.atom_poly(aid)
    sup = AT.atom_support(aid)
    nsup = P.p_support(num)
    if sup & ~nsup:
        return num, 0
    j = 0
    while j < emax:
        q = P.p_divexact(num, ap)
        if q is None:
            break
        num = q
        j += 1
    return num, j


def _cancel(num: dict, den: dict, candidates) -> tuple[dict, tuple]:
    for aid in candidates:
        e = den.get(aid, 0)
        if not e:
            continue
        num, j = _strip_atom(num, aid, e)
        if j:
            if j == e:
                del den[aid]
            else:
                den[aid] = e - j
        if not num:
            return {}, ()
    return num, tuple(sorted(den.items()))


def _den_poly(den) -> dict:
    r = {0: mpq(1)}
    for aid, e in den:
        r = P.p_mul(r, AT.atom_pow(aid, e))
    return r


class RationalExpr:
    """Immutable exact rational function; see module docs for invariants."""

    __slots__ = ("num", "den", "_hash", "_ev")

    def __init__(self, num: dict, den: tuple = ()):
        self.num = num
        self.den = den if num else ()
        self._hash = None
        self._ev = None

    # construction -----------------------------------------------------
    @staticmethod
    def from_poly(p) -> RationalExpr:
        if isinstance(p, P.MultiPoly):
            p = p.terms
        return RationalExpr(dict(p))

    @staticmethod
    def from_fraction(num: dict, den: dict) -> RationalExpr:
        """Normalise ``num/den`` for plain polynomial dicts."""
        if not den:
            raise DivisionByZeroError("zero denominator")
        if not num:
            return ZERO
        c, facs = AT.factor(den)
        num = P.p_scale(num, 1 / c)
        d = dict(facs)
        num, dt = _cancel(num, d, list(d))
        return RationalExpr(num, dt)

    @staticmethod
    def coerce(o) -> RationalExpr:
        if isinstance(o, RationalExpr):
            return o
        if isinstance(o, P.MultiPoly):
            return RationalExpr(dict(o.terms))
        return RationalExpr(P.p_const(coerce(o)))

    # queries ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return not self.den

    def is_constant(self) -> bool:
        return not self.den and (not self.num or list(self.num) == [0])

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.get(0, mpq(0))

    @property
    def numerator(self) -> P.MultiPoly:
        return P.MultiPoly(self.num)

    @property
    def denominator(self) -> P.MultiPoly:
        return P.MultiPoly(_den_poly(self.den))

    def denominator_factors(self) -> list[tuple[P.MultiPoly, int]]:
        return [(P.MultiPoly(AT.atom_poly(a)), e) for a, e in self.den]

    def nterms(self) -> int:
        return len(self.num)

    def support(self) -> set[str]:
        s = P.p_support(self.num)
        for a, _ in self.den:
            s |= AT.atom_support(a)
        return {P.gen_name(k) for k in range(s.bit_length()) if s >> k & 1}

    def depends_on(self, name: str) -> bool:
        k = P.gen_index(name)
        if any(P.exponent(m, k) for m in self.num):
            return True
        return any(AT.atom_support(a) >> k & 1 for a, _ in self.den)

    def __eq__(self, o):
        if not isinstance(o, RationalExpr):
            try:
                o = RationalExpr.coerce(o)
            except TypeError:
                return NotImplemented
        return self.den == o.den and self.num == o.num

    def __ne__(self, o):
        r = self.__eq__(o)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), self.den))
        return self._hash

    # arithmetic -------------------------------------------------------
    def __add__(self, o):
        o = _co(o)
        if o is None:
            return NotImplemented
        if not o.num:
            return self
        if not self.num:
            return o
        d1, d2 = self.den, o.den
        if d1 == d2:
            num = P.p_add(self.num, o.num)
            if not d1 or not num:
                return RationalExpr(num)
            den = dict(d1)
            num, dt = _cancel(num, den, list(den))
            return RationalExpr(num, dt)
        a1, a2 = dict(d1), dict(d2)
        lcm = dict(a1)
        for a, e in a2.items():
            if e > lcm.get(a, 0):
                lcm[a] = e
        f1 = {0: mpq(1)}
        f2 = {0: mpq(1)}
        for a, e in lcm.items():
            e1 = e - a1.get(a, 0)
            e2 = e - a2.get(a, 0)
            if e1:
                f1 = P.p_mul(f1, AT.atom_pow(a, e1))
            if e2:
                f2 = P.p_mul(f2, AT.atom_pow(a, e2))
        num = P.p_add(P.p_mul(self.num, f1), P.p_mul(o.num, f2))
        if not num:
            return ZERO
        # only atoms present at full power in both inputs can cancel
        cand = [a for a, e in lcm.items() if a1.get(a, 0) == e and a2.get(a, 0) == e]
        num, dt = _cancel(num, lcm, cand)
        return RationalExpr(num, dt)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(P.p_neg(self.num), self.den)

    def __pos__(self):
        return self

    def __sub__(self, o):
        o = _co(o)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        o = _co(o)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, o):
        o = _co(o)
        if o is None:
            return NotImplemented
        if not self.num or not o.num:
            return ZERO
        n1, n2 = self.num, o.num
        if not self.den and not o.den:
            return RationalExpr(P.p_mul(n1, n2))
        d1, d2 = dict(self.den), dict(o.den)
        merged = dict(d1)
        for a, e in d2.items():
            merged[a] = merged.get(a, 0) + e
        # n1 is coprime to d1 and n2 to d2, so only one-sided atoms can cancel
        c1 = [a for a in d2 if a not in d1]
        c2 = [a for a in d1 if a not in d2]
        if c1:
            n1, _ = _cancel(n1, merged, c1)
        if c2:
            n2, _ = _cancel(n2, merged, c2)
        return RationalExpr(P.p_mul(n1, n2), tuple(sorted(merged.items())))

    __rmul__ = __mul__

    def scale(self, c) -> RationalExpr:
        c = coerce(c)
        if not c:
            return ZERO
        return RationalExpr(P.p_scale(self.num, c), self.den)

    def reciprocal(self) -> RationalExpr:
        if not self.num:
            raise DivisionByZeroError("division by identically-zero expression")
        c, facs = AT.factor(self.num)
        num = P.p_scale(_den_poly(self.den), 1 / c)
        return RationalExpr(num, tuple(facs))

    def __truediv__(self, o):
        o = _co(o)
        if o is None:
            return NotImplemented
        if not o.num:
            raise DivisionByZeroError("division by identically-zero expression")
        if o.is_constant():
            return self.scale(1 / o.num[0])
        return self * o.reciprocal()

    def __rtruediv__(self, o):
        o = _co(o)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n == 0:
            if not self.num:
                raise DivisionByZeroError("0^0 is undefined")
            return ONE
        if n < 0:
            return self.reciprocal() ** (-n)
        num = P.p_pow(self.num, n)
        return RationalExpr(num, tuple((a, e * n) for a, e in self.den))

    # calculus ---------------------------------------------------------
    def diff(self, var: str) -> RationalExpr:
        """Partial derivative in a coordinate (parameters are constants)."""
        return self.diff_gen(P.coord_index(var))

    def diff_gen(self, k: int) -> RationalExpr:
        """Partial derivative in generator ``k`` (any generator)."""
        if not self.num:
            return ZERO
        dn = P.p_diff(self.num, k)
        live = [(a, e) for a, e in self.den if AT.atom_support(a) >> k & 1]
        if not live:
            if not dn:
                return ZERO
            dn, dt = _cancel(dn, dict(self.den), [a for a, _ in self.den])
            return RationalExpr(dn, dt)
        # f = N / prod a_i^{e_i};  f' = (N' prod a_i - N sum e_i a_i' prod_{j!=i} a_j) / prod a_i^{e_i+1}
        prod_all = {0: mpq(1)}
        for a, _ in live:
            prod_all = P.p_mul(prod_all, AT.atom_poly(a))
        top = P.p_mul(dn, prod_all) if dn else {}
        for i, (a, e) in enumerate(live):
            others = {0: mpq(1)}
            for j, (b, _) in enumerate(live):
                if j != i:
                    others = P.p_mul(others, AT.atom_poly(b))
            term = P.p_mul(P.p_scale(AT.atom_diff(a, k), mpq(e)), others)
            top = P.p_sub(top, P.p_mul(self.num, term))
        if not top:
            return ZERO
        den = dict(self.den)
        for a, _ in live:
            den[a] += 1
        top, dt = _cancel(top, den, list(den))
        return RationalExpr(top, dt)

    # substitution ------------------------------------------------------
    def substitute(self, mapping: dict) -> RationalExpr:
        """Replace generators by expressions (names or indices as keys)."""
        sub = {}
        for k, v in mapping.items():
            kk = P.gen_index(k) if isinstance(k, str) else k
            sub[kk] = RationalExpr.coerce(v)
        if not sub:
            return self
        cache: dict = {}
        num = _subst_poly(self.num, sub, cache)
        if not self.den:
            return num
        den = ONE
        for a, e in self.den:
            if AT.atom_support(a) & _mask(sub):
                den = den * _subst_poly(AT.atom_poly(a), sub, cache) ** e
            else:
                den = den * RationalExpr(dict(AT.atom_pow(a, e)))
        return num / den

    # numerics -----------------------------------------------------------
    def _compiled(self):
        if self._ev is None:
            numc = [(to_complex(c), P.unpack(m)) for m, c in self.num.items()]
            denc = []
            for a, e in self.den:
                ap = AT.atom_poly(a)
                denc.append(([(to_complex(c), P.unpack(m)) for m, c in ap.items()], e))
            self._ev = (numc, denc)
        return self._ev

    def eval_numeric(self, point) -> complex:
        vals = _point_values(point)
        numc, denc = self._compiled()
        pw: dict = {}

        def power(k, e):
            key = (k, e)
            v = pw.get(key)
            if v is None:
                try:
                    v = vals[k] ** e
                except IndexError:
                    raise KeyError(f"generator {P.gen_name(k)!r} not assigned") from None
                if v is None:
                    raise KeyError(f"generator {P.gen_name(k)!r} not assigned")
                pw[key] = v
            return v

        def ev(terms):
            s = 0j
            for c, ex in terms:
                t = c
                for k, e in ex:
                    t *= power(k, e)
                s += t
            return s

        top = ev(numc)
        bot = 1 + 0j
        for terms, e in denc:
            v = ev(terms)
            if abs(v) < POLE_TOL:
                raise PoleError("denominator vanishes at the evaluation point")
            bot *= v ** e
        if abs(bot) < POLE_TOL:
            raise PoleError("denominator vanishes at the evaluation point")
        return top / bot

    def denominator_values(self, point) -> list[complex]:
        """Numeric values of every denominator atom at ``point``."""
        vals = _point_values(point)
        _, denc = self._compiled()
        out = []
        for terms, _ in denc:
            s = 0j
            for c, ex in terms:
                t = c
                for k, e in ex:
                    t *= vals[k] ** e
                s += t
            out.append(s)
        return out

    def eval_exact(self, assignment: dict) -> object:
        """Exact value for a full assignment of coefficients to generators."""
        sub = {P.gen_index(k) if isinstance(k, str) else k: coerce(v) for k, v in assignment.items()}
        top = _eval_poly_exact(self.num, sub)
        bot = mpq(1)
        for a, e in self.den:
            v = _eval_poly_exact(AT.atom_poly(a), sub)
            if not v:
                raise PoleError("denominator vanishes exactly at the point")
            bot = bot * v ** e
        return top / bot

    # printing -----------------------------------------------------------
    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"RationalExpr({to_text(self)!r})"


def _mask(sub) -> int:
    m = 0
    for k in sub:
        m |= 1 << k
    return m


def _subst_poly(p: dict, sub: dict, cache: dict) -> RationalExpr:
    rest = {}
    groups: dict[int, dict] = {}
    for m, c in p.items():
        hit = 0
        for k in sub:
            e = P.exponent(m, k)
            if e:
                hit += e << (P.FIELD * k)
        if not hit:
            rest[m] = c
        else:
            groups.setdefault(hit, {})[m - hit] = c
    total = RationalExpr(rest) if rest else ZERO
    for hit, coeffs in groups.items():
        factor = ONE
        for k, e in P.unpack(hit):
            key = (k, e)
            v = cache.get(key)
            if v is None:
                v = sub[k] ** e
                cache[key] = v
            factor = factor * v
        total = total + factor * RationalExpr(coeffs)
    return total


def _eval_poly_exact(p: dict, sub: dict):
    s = mpq(0)
    pw = {}
    for m, c in p.items():
        t = c
        for k, e in P.unpack(m):
            key = (k, e)
            v = pw.get(key)
            if v is None:
                if k not in sub:
                    raise KeyError(f"generator {P.gen_name(k)!r} not assigned")
                v = sub[k] ** e
                pw[key] = v
            t = t * v
        s = s + t
    return s


def _point_values(point) -> list:
    if hasattr(point, "values_by_index"):
        return point.values_by_index()
    n = len(P.generators())
    vals = [None] * n
    for k, v in point.items():
        vals[P.gen_index(k) if isinstance(k, str) else k] = complex(v)
    return vals


def _co(o):
    if isinstance(o, RationalExpr):
        return o
    try:
        return RationalExpr.coerce(o)
    except TypeError:
        return None


def to_text(e: RationalExpr) -> str:
    """Canonical grammar-compatible text."""
    ns = P.p_str(e.num)
    if not e.den:
        return ns
    if len(e.num) > 1:
        ns = f"({ns})"
    parts = []
    for a, ex in sorted(e.den, key=lambda t: AT.atom_sort_key(t[0])):
        s = AT.atom_str(a)
        if len(AT.atom_poly(a)) > 1:
            s = f"({s})"
        parts.append(s if ex == 1 else f"{s}^{ex}")
    ds = "*".join(parts)
    if len(parts) > 1:
        ds = f"({ds})"
    return f"{ns}/{ds}"


def const(c) -> RationalExpr:
    return RationalExpr(P.p_const(coerce(c)))


def var(name: str) -> RationalExpr:
    return RationalExpr(P.p_var(P.gen_index(name)))


ZERO = RationalExpr({})
ONE = RationalExpr({0: mpq(1)})
I_UNIT = RationalExpr({0: GaussianRational(0, 1)})

