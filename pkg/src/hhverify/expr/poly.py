"""Sparse multivariate polynomials with packed integer monomials.

A monomial is a single Python int: generator ``i`` owns the 16-bit field
starting at bit ``16*i`` (15 exponent bits plus one guard bit).  Monomial
multiplication is integer addition and the integer order is a lexicographic
order in which later generators are more significant.  Generators 0..3 are
the coordinates ``w, z, x, y``; parameters are appended after them, so the
order is ``w < z < x < y < parameters``.

Polynomials are plain ``dict[int, coeff]`` with no zero values.  The
:class:`MultiPoly` wrapper is the public face; the free functions are what
the rational layer uses internally.
"""
from __future__ import annotations

import heapq
import threading

from gmpy2 import mpq

from .coeffs import GaussianRational, coerce, fmt_coeff

FIELD = 16
EXP_MASK = (1 << (FIELD - 1)) - 1
MAX_EXP = EXP_MASK

COORDS = ("w", "z", "x", "y")
DEFAULT_PARAMS = ("a", "b", "c", "lam", "eps", "W", "Z")
RESERVED = {"i"}

_lock = threading.Lock()
_names: list[str] = []
_index: dict[str, int] = {}
_guard = 0


def _register(name: str) -> int:
    global _guard
    with _lock:
        if name in _index:
            return _index[name]
        k = len(_names)
        _names.append(name)
        _index[name] = k
        _guard |= 1 << (FIELD * k + FIELD - 1)
        return k


for _n in COORDS + DEFAULT_PARAMS:
    _register(_n)


def declare(name: str) -> int:
    """Declare a parameter generator (idempotent) and return its index."""
    if name in RESERVED:
        raise ValueError(f"'{name}' is reserved")
    if not name or not (name[0].isalpha() or name[0] == "_") or not all(ch.isalnum() or ch == "_" for ch in name):
        raise ValueError(f"invalid generator name {name!r}")
    return _register(name)


def gen_index(name: str) -> int:
    try:
        return _index[name]
    except KeyError:
        raise KeyError(f"unknown generator {name!r}") from None


def is_declared(name: str) -> bool:
    return name in _index


def gen_name(k: int) -> str:
    return _names[k]


def generators() -> tuple[str, ...]:
    return tuple(_names)


def coord_index(name: str) -> int:
    if name not in COORDS:
        raise ValueError(f"{name!r} is not a coordinate (expected one of {COORDS})")
    return _index[name]


# monomials ---------------------------------------------------------------

def mono(exps: dict[int, int]) -> int:
    m = 0
    for k, e in exps.items():
        if e < 0 or e > MAX_EXP:
            raise OverflowError(f"exponent {e} out of range")
        m += e << (FIELD * k)
    return m


def unpack(m: int) -> list[tuple[int, int]]:
    """Nonzero (generator, exponent) pairs of a monomial."""
    out = []
    k = 0
    while m:
        e = m & 0xFFFF
        if e:
            out.append((k, e))
        m >>= FIELD
        k += 1
    return out


def exponent(m: int, k: int) -> int:
    return (m >> (FIELD * k)) & EXP_MASK


def divides(d: int, m: int) -> bool:
    """True when monomial ``d`` divides ``m`` (field-wise exponent comparison)."""
    return ((m | _guard) - d) & _guard == _guard


def mono_support(m: int) -> int:
    """Bitmask of generators appearing in ``m``."""
    s = 0
    k = 0
    while m:
        if m & 0xFFFF:
            s |= 1 << k
        m >>= FIELD
        k += 1
    return s


def mono_str(m: int) -> str:
    # natural variable order inside a monomial: generators in index order
    parts = []
    for k, e in unpack(m):
        parts.append(_names[k] if e == 1 else f"{_names[k]}^{e}")
    return "*".join(parts)


def mono_min(a: int, b: int) -> int:
    """Field-wise minimum of two monomials (monomial gcd)."""
    r = 0
    shift = 0
    while a and b:
        ea, eb = a & 0xFFFF, b & 0xFFFF
        r |= min(ea, eb) << shift
        a >>= FIELD
        b >>= FIELD
        shift += FIELD
    return r


# dict polynomial kernels ---------------------------------------------------

def p_const(c) -> dict:
    c = coerce(c)
    return {0: c} if c else {}


def p_var(k: int) -> dict:
    return {1 << (FIELD * k): mpq(1)}


def p_add(a: dict, b: dict) -> dict:
    if len(a) < len(b):
        a, b = b, a
    r = dict(a)
    for m, c in b.items():
        v = r.get(m)
        if v is None:
            r[m] = c
        else:
            v = v + c
            if v:
                r[m] = v
            else:
                del r[m]
    return r


def p_sub(a: dict, b: dict) -> dict:
    r = dict(a)
    for m, c in b.items():
        v = r.get(m)
        if v is None:
            r[m] = -c
        else:
            v = v - c
            if v:
                r[m] = v
            else:
                del r[m]
    return r


def p_neg(a: dict) -> dict:
    return {m: -c for m, c in a.items()}


def p_scale(a: dict, c) -> dict:
    if not c:
        return {}
    if c == 1:
        return a
    return {m: v * c for m, v in a.items()}


def p_shift(a: dict, m0: int) -> dict:
    """Multiply by a monomial."""
    if not m0:
        return a
    return {m + m0: c for m, c in a.items()}


def p_mul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    if len(a) == 1:
        (ma, ca), = a.items()
        if ca == 1:
            return {ma + mb: cb for mb, cb in b.items()}
        return {ma + mb: ca * cb for mb, cb in b.items()}
    r: dict = {}
    get = r.get
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = ma + mb
            r[m] = get(m, 0) + ca * cb
    return {m: c for m, c in r.items() if c}


def p_pow(a: dict, n: int) -> dict:
    if n < 0:
        raise ValueError("negative polynomial power")
    if len(a) == 1:
        (m, c), = a.items()
        return {m * n: c ** n}
    r = {0: mpq(1)}
    b = a
    while n:
        if n & 1:
            r = p_mul(r, b)
        n >>= 1
        if n:
            b = p_mul(b, b)
    return r


def p_diff(a: dict, k: int) -> dict:
    shift = FIELD * k
    unit = 1 << shift
    r = {}
    for m, c in a.items():
        e = (m >> shift) & EXP_MASK
        if e:
            r[m - unit] = c * e
    return r


def p_degree(a: dict, k: int) -> int:
    shift = FIELD * k
    return max(((m >> shift) & EXP_MASK for m in a), default=0)


def p_support(a: dict) -> int:
    s = 0
    for m in a:
        s |= mono_support(m)
    return s


def p_mono_gcd(a: dict) -> int:
    it = iter(a)
    g = next(it)
    for m in it:
        if not g:
            break
        g = mono_min(g, m)
    return g


def p_is_real(a: dict) -> bool:
    return not any(isinstance(c, GaussianRational) for c in a.values())


def p_leading(a: dict) -> tuple[int, object]:
    m = max(a)
    return m, a[m]


def p_divexact(p: dict, d: dict):
    """Exact quotient ``p / d`` or ``None`` when ``d`` does not divide ``p``."""
    if not d:
        raise ZeroDivisionError("division by zero polynomial")
    if not p:
        return {}
    if len(d) == 1:
        (md, cd), = d.items()
        if not all(divides(md, m) for m in p):
            return None
        if cd == 1:
            return {m - md: c for m, c in p.items()}
        return {m - md: c / cd for m, c in p.items()}
    lm_d = max(d)
    tm_d = min(d)
    # cheap necessary conditions: leading and trailing monomials must divide
    if not divides(lm_d, max(p)) or not divides(tm_d, min(p)):
        return None
    lc_d = d[lm_d]
    rest = [(m - lm_d, c) for m, c in d.items() if m != lm_d]
    r = dict(p)
    heap = [-m for m in r]
    heapq.heapify(heap)
    q = {}
    while r:
        while True:
            lm = -heapq.heappop(heap)
            if lm in r:
                break
        if not divides(lm_d, lm):
            return None
        qm = lm - lm_d
        qc = r.pop(lm)
        if lc_d != 1:
            qc = qc / lc_d
        q[qm] = qc
        for dm, dc in rest:
            m = qm + dm + lm_d
            v = r.get(m)
            if v is None:
                r[m] = -qc * dc
                heapq.heappush(heap, -m)
            else:
                v = v - qc * dc
                if v:
                    r[m] = v
                else:
                    del r[m]
    return q


def p_collect(a: dict, k: int) -> dict[int, dict]:
    """Coefficients of powers of generator ``k`` (each a poly free of ``k``)."""
    shift = FIELD * k
    out: dict[int, dict] = {}
    for m, c in a.items():
        e = (m >> shift) & EXP_MASK
        out.setdefault(e, {})[m - (e << shift)] = c
    return out


def _print_key(m: int):
    # exponent vector with w most significant, then z, x, y, parameters
    out = []
    while m:
        out.append(m & 0xFFFF)
        m >>= FIELD
    return tuple(out) + (0,) * (len(_names) - len(out))


def p_str(a: dict) -> str:
    if not a:
        return "0"
    pieces = []
    for m in sorted(a, key=_print_key, reverse=True):
        c = a[m]
        ms = mono_str(m)
        neg = False
        if not isinstance(c, GaussianRational) and c < 0:
            neg = True
            c = -c
        if ms:
            if c == 1:
                body = ms
            else:
                body = f"{fmt_coeff(c)}*{ms}"
        else:
            body = fmt_coeff(c)
        pieces.append((neg, body))
    head_neg, head = pieces[0]
    out = ("-" + head) if head_neg else head
    for neg, body in pieces[1:]:
        out += (" - " if neg else " + ") + body
    return out


class MultiPoly:
    """Immutable polynomial over Q(i) in the registered generators."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, c) -> MultiPoly:
        return cls(p_const(c))

    @classmethod
    def var(cls, name: str) -> MultiPoly:
        return cls(p_var(gen_index(name)))

    def exponent_vectors(self) -> dict[tuple[int, ...], object]:
        n = len(_names)
        out = {}
        for m, c in self.terms.items():
            v = [0] * n
            for k, e in unpack(m):
                v[k] = e
            out[tuple(v)] = c
        return out

    def __add__(self, o):
        return MultiPoly(p_add(self.terms, _as_terms(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return MultiPoly(p_sub(self.terms, _as_terms(o)))

    def __rsub__(self, o):
        return MultiPoly(p_sub(_as_terms(o), self.terms))

    def __neg__(self):
        return MultiPoly(p_neg(self.terms))

    def __mul__(self, o):
        return MultiPoly(p_mul(self.terms, _as_terms(o)))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return MultiPoly(p_pow(self.terms, n))

    def __eq__(self, o):
        return isinstance(o, MultiPoly) and self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def diff(self, name: str) -> MultiPoly:
        return MultiPoly(p_diff(self.terms, gen_index(name)))

    def __str__(self):
        return p_str(self.terms)

    def __repr__(self):
        return f"MultiPoly({p_str(self.terms)!r})"


def _as_terms(o) -> dict:
    if isinstance(o, MultiPoly):
        return o.terms
    return p_const(o)
