"""Registry of irreducible monic denominator factors ("atoms").

Denominators of :class:`~hhverify.expr.rational.RationalExpr` are products
of atom powers.  An atom is an irreducible polynomial over Q(i), made monic
with respect to the packed lexicographic order, and interned here so that
equal factors share one integer id.  Keeping denominators factored turns
cancellation into trial division by known factors and makes zero testing a
plain emptiness check on the numerator.
"""
from __future__ import annotations

import threading

from gmpy2 import mpq

from . import poly as P
from .coeffs import GaussianRational

_lock = threading.Lock()
_polys: list[dict] = []     # atom id -> monic polynomial
_support: list[int] = []    # atom id -> generator bitmask
_key: dict[frozenset, int] = {}
_powcache: dict[tuple[int, int], dict] = {}
_diffcache: dict[tuple[int, int], dict] = {}
_var_atom: dict[int, int] = {}  # generator index -> atom id of the bare variable


def _freeze(p: dict) -> frozenset:
    return frozenset(p.items())


def intern(p: dict) -> int:
    """Intern a monic irreducible polynomial; returns its atom id."""
    k = _freeze(p)
    aid = _key.get(k)
    if aid is not None:
        return aid
    with _lock:
        aid = _key.get(k)
        if aid is not None:
            return aid
        aid = len(_polys)
        _polys.append(dict(p))
        _support.append(P.p_support(p))
        _key[k] = aid
        if len(p) == 1:
            (m, _), = p.items()
            ex = P.unpack(m)
            if len(ex) == 1 and ex[0][1] == 1:
                _var_atom[ex[0][0]] = aid
        return aid


def var_atom(k: int) -> int:
    aid = _var_atom.get(k)
    if aid is None:
        aid = intern(P.p_var(k))
    return aid


def atom_poly(aid: int) -> dict:
    return _polys[aid]


def atom_support(aid: int) -> int:
    return _support[aid]


def atom_var(aid: int):
    """Generator index when the atom is a bare variable, else ``None``."""
    p = _polys[aid]
    if len(p) != 1:
        return None
    (m, _), = p.items()
    ex = P.unpack(m)
    return ex[0][0]


def atom_pow(aid: int, e: int) -> dict:
    if e == 1:
        return _polys[aid]
    key = (aid, e)
    r = _powcache.get(key)
    if r is None:
        r = P.p_pow(_polys[aid], e)
        if len(_powcache) < 20000:
            _powcache[key] = r
    return r


def atom_diff(aid: int, k: int) -> dict:
    key = (aid, k)
    r = _diffcache.get(key)
    if r is None:
        r = P.p_diff(_polys[aid], k)
        _diffcache[key] = r
    return r


def atom_str(aid: int) -> str:
    return P.p_str(_polys[aid])


def atom_sort_key(aid: int):
    p = _polys[aid]
    return (len(p) > 1, P.p_str(p))


def monic(p: dict) -> tuple[object, dict]:
    """Split ``p`` as ``lc * q`` with ``q`` monic in the packed order."""
    lm = max(p)
    lc = p[lm]
    if lc == 1:
        return mpq(1), p
    inv = 1 / lc
    return lc, {m: c * inv for m, c in p.items()}


def _is_trivially_irreducible(p: dict) -> bool:
    # total degree one, or degree one in some generator with coprime-looking
    # coefficient split, counts as irreducible.  Only the first test is
    # unconditional; the second is restricted to binomials.
    tot = max(sum(e for _, e in P.unpack(m)) for m in p)
    if tot <= 1:
        return True
    return False


def factor(p: dict) -> tuple[object, list[tuple[int, int]]]:
    """Factor a nonzero polynomial into ``const * prod(atom^e)``.

    Variable factors and factors matching already-known atoms are removed by
    exact division; whatever remains is handed to sympy's multivariate
    factorisation over Q(i).
    """
    if not p:
        raise ZeroDivisionError("cannot factor the zero polynomial")
    out: dict[int, int] = {}
    g = P.p_mono_gcd(p)
    if g:
        for k, e in P.unpack(g):
            aid = var_atom(k)
            out[aid] = out.get(aid, 0) + e
        p = {m - g: c for m, c in p.items()}
    const, q = monic(p)
    if len(q) == 1:
        return const, sorted(out.items())
    # trial division by known non-variable atoms
    sup = P.p_support(q)
    for aid in range(len(_polys)):
        ap = _polys[aid]
        if len(ap) == 1 or _support[aid] & ~sup:
            continue
        while len(q) > 1:
            r = P.p_divexact(q, ap)
            if r is None:
                break
            q = r
            out[aid] = out.get(aid, 0) + 1
        if len(q) == 1:
            break
    if len(q) > 1:
        lead, parts = _factor_remainder(q)
        const = const * lead
        for fp, e in parts:
            c2, fm = monic(fp)
            const = const * (c2 ** e)
            aid = intern(fm)
            out[aid] = out.get(aid, 0) + e
    else:
        (m, c), = q.items()
        const = const * c
    return const, sorted(out.items())


def _factor_remainder(q: dict) -> tuple[object, list[tuple[dict, int]]]:
    if _is_trivially_irreducible(q):
        return mpq(1), [(q, 1)]
    return _sympy_factor(q)


def _sympy_factor(q: dict) -> tuple[object, list[tuple[dict, int]]]:
    import sympy as sp

    sup = P.p_support(q)
    gens = [k for k in range(len(P.generators())) if sup >> k & 1]
    syms = sp.symbols([f"g{k}" for k in gens])
    real = P.p_is_real(q)
    rep = {}
    for m, c in q.items():
        ex = dict(P.unpack(m))
        key = tuple(ex.get(k, 0) for k in gens)
        if isinstance(c, GaussianRational):
            rep[key] = sp.Rational(int(c.re.numerator), int(c.re.denominator)) + sp.I * sp.Rational(
                int(c.im.numerator), int(c.im.denominator))
        else:
            rep[key] = sp.Rational(int(c.numerator), int(c.denominator))
    domain = sp.QQ if real else sp.QQ_I
    poly = sp.Poly.from_dict(rep, *syms, domain=domain)
    if real:
        # factor over Q first; then split further over Q(i) if possible
        lead, facs = poly.factor_list()
        result = []
        for f, e in facs:
            fi = sp.Poly(f.as_expr(), *syms, domain=sp.QQ_I)
            c2, sub = fi.factor_list()
            lead = lead * c2 ** e
            for g, e2 in sub:
                result.append((g, e * e2))
    else:
        lead, result = poly.factor_list()
    out = []
    for f, e in result:
        d = {}
        for key, c in f.as_dict().items():
            m = 0
            for k, ex in zip(gens, key):
                m += ex << (P.FIELD * k)
            d[m] = _from_sympy(c)
        out.append((d, e))
    return _from_sympy(sp.sympify(lead)), out


def _from_sympy(c):
    import sympy as sp

    c = sp.nsimplify(c) if not isinstance(c, (sp.Rational, sp.Integer)) else c
    re, im = c.as_real_imag()
    re = mpq(int(sp.numer(re)), int(sp.denom(re)))
    im = mpq(int(sp.numer(im)), int(sp.denom(im)))
    return GaussianRational.make(re, im)
