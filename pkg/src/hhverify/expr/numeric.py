"""Numeric evaluation points."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import poly as P


@dataclass(frozen=True)
class NumericPoint:
    """Complex double values for coordinates and parameters."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = {}
        for k, v in self.values.items():
            name = k if isinstance(k, str) else P.gen_name(k)
            P.gen_index(name)
            vals[name] = complex(v)
        object.__setattr__(self, "values", vals)

    def values_by_index(self) -> list:
        out = [None] * len(P.generators())
        for k, v in self.values.items():
            out[P.gen_index(k)] = v
        return out

    def __getitem__(self, name: str) -> complex:
        return self.values[name]

    def with_values(self, **kw) -> NumericPoint:
        d = dict(self.values)
        d.update(kw)
        return NumericPoint(d)

    def covers(self, names) -> bool:
        return all(n in self.values for n in names)

    def to_json(self) -> dict:
        return {k: [v.real, v.imag] for k, v in sorted(self.values.items(), key=lambda t: P.gen_index(t[0]))}


def random_complex(rng: random.Random, lo: float = 0.5, hi: float = 2.0) -> complex:
    import cmath

    r = rng.uniform(lo, hi)
    th = rng.uniform(0.0, 2 * cmath.pi)
    return cmath.rect(r, th)


def random_point(rng: random.Random, names, avoid=(), tol: float = 1e-3, tries: int = 200,
                 fixed: dict | None = None) -> NumericPoint:
    """Random point with |value| in [0.5, 2] per generator.

    The point is redrawn while any denominator factor of an expression in
    ``avoid`` is within ``tol`` of zero there.
    """
    fixed = dict(fixed or {})
    for _ in range(tries):
        vals = {n: random_complex(rng) for n in names if n not in fixed}
        vals.update(fixed)
        pt = NumericPoint(vals)
        ok = True
        for e in avoid:
            if any(abs(v) < tol for v in e.denominator_values(pt)):
                ok = False
                break
        if ok:
            return pt
    raise RuntimeError("could not find a sample point away from poles")
