"""Two-component spinor components with RationalExpr entries.

Conventions: epsilon_{01} = epsilon^{01} = 1 for both spin spaces, indices
are raised and lowered with the NW-SE rule

    psi^A = eps^{AB} psi_B,        psi_B = psi^A eps_{AB},

so eps^{AC} eps_{BC} = delta^A_B.  The coordinate dictionary identifies
x^{A0'} = x^A = (y, -x) and x^{A1'} = w^A = (w, z).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .expr import ZERO, RationalExpr, const, var

__all__ = [
    "Slot",
    "SpinorField",
    "epsilon",
    "raise_lower",
    "symmetrize",
    "contract",
    "outer",
    "EPS",
    "CoordinateChart",
    "CHART",
    "spin_frame",
]

# numeric epsilon, identical for up/down and primed/unprimed
EPS = ((0, 1), (-1, 0))


@dataclass(frozen=True)
class Slot:
    label: str
    primed: bool = False
    up: bool = False

    def __str__(self):
        mark = "^" if self.up else "_"
        return f"{mark}{self.label}{chr(39) if self.primed else ''}"

    def flipped(self) -> Slot:
        return Slot(self.label, self.primed, not self.up)


def _parse_sig(sig) -> tuple[Slot, ...]:
    if isinstance(sig, (tuple, list)) and all(isinstance(s, Slot) for s in sig):
        return tuple(sig)
    slots = []
    for tok in str(sig).split():
        up = tok[0] == "^"
        if tok[0] not in "^_":
            raise ValueError(f"slot {tok!r} needs a ^ or _ marker")
        body = tok[1:]
        primed = body.endswith("'")
        slots.append(Slot(body.rstrip("'"), primed, up))
    return tuple(slots)


class SpinorField:
    """Dense component array over {0,1}^n, stored row-major."""

    __slots__ = ("slots", "comps")

    def __init__(self, slots, comps: Iterable):
        self.slots = _parse_sig(slots)
        comps = tuple(RationalExpr.coerce(c) for c in comps)
        if len(comps) != 1 << len(self.slots):
            raise ValueError("component count must be 2^(number of slots)")
        self.comps = comps

    @classmethod
    def from_function(cls, slots, fn: Callable[..., object]) -> SpinorField:
        slots = _parse_sig(slots)
        return cls(slots, [fn(*idx) for idx in itertools.product((0, 1), repeat=len(slots))])

    @classmethod
    def zeros(cls, slots) -> SpinorField:
        slots = _parse_sig(slots)
        return cls(slots, [ZERO] * (1 << len(slots)))

    @property
    def rank(self) -> int:
        return len(self.slots)

    def signature(self) -> str:
        return " ".join(str(s) for s in self.slots)

    @staticmethod
    def _flat(idx) -> int:
        k = 0
        for i in idx:
            k = 2 * k + i
        return k

    def __getitem__(self, idx) -> RationalExpr:
        if not isinstance(idx, tuple):
            idx = (idx,)
        if len(idx) != self.rank:
            raise IndexError("wrong number of indices")
        return self.comps[self._flat(idx)]

    def items(self):
        for idx in itertools.product((0, 1), repeat=self.rank):
            yield idx, self.comps[self._flat(idx)]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)

    def map(self, fn) -> SpinorField:
        return SpinorField(self.slots, [fn(c) for c in self.comps])

    def __add__(self, o: SpinorField) -> SpinorField:
        self._check_same(o)
        return SpinorField(self.slots, [a + b for a, b in zip(self.comps, o.comps)])

    def __sub__(self, o: SpinorField) -> SpinorField:
        self._check_same(o)
        return SpinorField(self.slots, [a - b for a, b in zip(self.comps, o.comps)])

    def __neg__(self):
        return self.map(lambda c: -c)

    def scale(self, s) -> SpinorField:
        s = RationalExpr.coerce(s)
        return self.map(lambda c: c * s)

    def _check_same(self, o: SpinorField):
        if [(s.primed, s.up) for s in self.slots] != [(s.primed, s.up) for s in o.slots]:
            raise ValueError("index signatures differ")

    def __eq__(self, o):
        return isinstance(o, SpinorField) and self.comps == o.comps and \
            [(s.primed, s.up) for s in self.slots] == [(s.primed, s.up) for s in o.slots]

    def __hash__(self):
        return hash(self.comps)

    def to_json(self) -> dict:
        return {"signature": self.signature(), "components": [str(c) for c in self.comps]}

    def __repr__(self):
        return f"SpinorField({self.signature()!r}, {[str(c) for c in self.comps]})"


def epsilon(kind: str = "unprimed", variance: str = "down") -> SpinorField:
    if kind not in ("unprimed", "primed") or variance not in ("up", "down"):
        raise ValueError("kind must be unprimed|primed and variance up|down")
    primed = kind == "primed"
    up = variance == "up"
    slots = (Slot("A", primed, up), Slot("B", primed, up))
    return SpinorField.from_function(slots, lambda a, b: EPS[a][b])


def raise_lower(t: SpinorField, slot: int, direction: str) -> SpinorField:
    """Move one index with the NW-SE rule."""
    if not 0 <= slot < t.rank:
        raise IndexError(f"invalid slot {slot}")
    s = t.slots[slot]
    if direction not in ("up", "down"):
        raise ValueError("direction must be up or down")
    if (direction == "up") == s.up:
        raise ValueError(f"slot {slot} is already {direction}")
    new_slots = t.slots[:slot] + (s.flipped(),) + t.slots[slot + 1:]

    def comp(*idx):
        acc = ZERO
        for j in (0, 1):
            old = idx[:slot] + (j,) + idx[slot + 1:]
            if direction == "up":
                e = EPS[idx[slot]][j]      # psi^A = eps^{AB} psi_B
            else:
                e = EPS[j][idx[slot]]      # psi_B = psi^A eps_{AB}
            if e:
                acc = acc + t[old] * e if e != 1 else acc + t[old]
        return acc

    return SpinorField.from_function(new_slots, comp)


def raise_all(t: SpinorField) -> SpinorField:
    for k in range(t.rank):
        if not t.slots[k].up:
            t = raise_lower(t, k, "up")
    return t


def lower_all(t: SpinorField) -> SpinorField:
    for k in range(t.rank):
        if t.slots[k].up:
            t = raise_lower(t, k, "down")
    return t


def symmetrize(t: SpinorField, slots: Iterable[int] | None = None) -> SpinorField:
    """Average over all permutations of the listed slots (weight 1/n!)."""
    slots = tuple(range(t.rank)) if slots is None else tuple(slots)
    if len(set(slots)) != len(slots) or any(not 0 <= s < t.rank for s in slots):
        raise IndexError("invalid slot set")
    kinds = {(t.slots[s].primed, t.slots[s].up) for s in slots}
    if len(kinds) > 1:
        raise ValueError("symmetrized slots must share kind and variance")
    perms = list(itertools.permutations(range(len(slots))))
    w = const(1) / math.factorial(len(slots))

    def comp(*idx):
        vals = [idx[s] for s in slots]
        acc = ZERO
        for p in perms:
            j = list(idx)
            for pos, src in zip(slots, p):
                j[pos] = vals[src]
            acc = acc + t[tuple(j)]
        return acc * w

    return SpinorField.from_function(t.slots, comp)


def contract(t: SpinorField, slot_up: int, slot_down: int) -> SpinorField:
    su, sd = t.slots[slot_up], t.slots[slot_down]
    if su.primed != sd.primed:
        raise ValueError("cannot contract primed with unprimed index")
    if not su.up or sd.up:
        raise ValueError("contraction needs one up and one down slot")
    keep = [k for k in range(t.rank) if k not in (slot_up, slot_down)]
    new_slots = tuple(t.slots[k] for k in keep)

    def comp(*idx):
        acc = ZERO
        for j in (0, 1):
            full = [0] * t.rank
            for k, v in zip(keep, idx):
                full[k] = v
            full[slot_up] = j
            full[slot_down] = j
            acc = acc + t[tuple(full)]
        return acc

    return SpinorField.from_function(new_slots, comp)


def outer(a: SpinorField, b: SpinorField) -> SpinorField:
    return SpinorField(a.slots + b.slots, [x * y for x in a.comps for y in b.comps])


def full_contraction(a: SpinorField, b: SpinorField) -> RationalExpr:
    """sum over all indices of a[idx] * b[idx] (caller handles variance)."""
    if a.rank != b.rank:
        raise ValueError("rank mismatch")
    acc = ZERO
    for x, y in zip(a.comps, b.comps):
        if x and y:
            acc = acc + x * y
    return acc


def spin_frame() -> dict[str, SpinorField]:
    """Primed dyad with o^{A'} = (1,0), iota^{A'} = (0,1).

    Lowered with the NW-SE rule this gives o_{A'} = (0,1), iota_{A'} = (-1,0),
    and o^{B'} iota^{C'} - iota^{B'} o^{C'} = eps^{B'C'}.
    """
    o_up = SpinorField((Slot("A", True, True),), [1, 0])
    i_up = SpinorField((Slot("A", True, True),), [0, 1])
    return {
        "o^": o_up,
        "iota^": i_up,
        "o_": raise_lower(o_up, 0, "down"),
        "iota_": raise_lower(i_up, 0, "down"),
    }


class CoordinateChart:
    """x^{AA'} as coordinate functions: x^{A0'} = (y, -x), x^{A1'} = (w, z)."""

    _TABLE = {(0, 0): ("y", 1), (0, 1): ("w", 1), (1, 0): ("x", -1), (1, 1): ("z", 1)}

    def coordinate(self, A: int, Ap: int) -> RationalExpr:
        name, sgn = self._TABLE[(A, Ap)]
        return var(name) * sgn

    def inverse(self, name: str) -> tuple[tuple[int, int], int]:
        for key, (n, s) in self._TABLE.items():
            if n == name:
                return key, s
        raise KeyError(name)

    def as_field(self) -> SpinorField:
        return SpinorField.from_function("^A ^A'", self.coordinate)


CHART = CoordinateChart()

