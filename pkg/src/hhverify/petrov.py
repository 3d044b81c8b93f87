"""Petrov type of the anti-self-dual Weyl spinor at sample points.

At each point the Weyl spinor is evaluated exactly (the float coordinates
are converted to Gaussian rationals without rounding).  The quartic
Psi(t) = C_{ABCD} zeta^A zeta^B zeta^C zeta^D with zeta = (1, t) then has
exact coefficients, so root multiplicities come from an exact square-free
decomposition.  A root at infinity has multiplicity 4 - deg Psi.  The
distinct roots are also found numerically and clustered with relative
tolerance 1e-6 as a cross-check.
"""
from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .expr import NumericPoint, PoleError, coerce, random_point
from .expr.coeffs import to_complex
from .geometry import _geo

__all__ = ["PetrovVerdict", "PointPattern", "petrov_classify", "petrov_label", "quartic_coefficients",
           "multiplicity_pattern", "PetrovError", "sample_points"]

LABELS = {(1, 1, 1, 1): "I", (2, 1, 1): "II", (2, 2): "D", (3, 1): "III", (4,): "N", (): "O"}
CLUSTER_TOL = 1e-6
TINY = 1e-12


class PetrovError(ArithmeticError):
    pass


def petrov_label(pattern: tuple[int, ...]) -> str:
    return LABELS[tuple(sorted(pattern, reverse=True))]


# univariate polynomials over Q(i), coefficient lists low -> high ----------

def _trim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def _deriv(p):
    return _trim([c * i for i, c in enumerate(p)][1:])


def _divmod(a, b):
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError
    q = [0] * max(len(a) - len(b) + 1, 0)
    inv = 1 / b[-1]
    while a and len(a) >= len(b):
        s = len(a) - len(b)
        c = a[-1] * inv
        q[s] = c
        for i, bc in enumerate(b):
            a[s + i] = a[s + i] - c * bc
        a.pop()
        a = _trim(a)
    return _trim(q), a


def _gcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _divmod(a, b)
        a, b = b, r
    if not a:
        return a
    inv = 1 / a[-1]
    return [c * inv for c in a]


def square_free_parts(p) -> list[tuple[list, int]]:
    """Yun's algorithm: p = c * prod f_i^i with f_i square-free and coprime."""
    p = _trim(p)
    if len(p) <= 1:
        return []
    out = []
    dp = _deriv(p)
    a = _gcd(p, dp)
    b, _ = _divmod(p, a)
    c, _ = _divmod(dp, a)
    d = _trim([ci - bi for ci, bi in itertools.zip_longest(c, _deriv(b), fillvalue=0)])
    i = 1
    while len(b) > 1:
        f = _gcd(b, d)
        b, _ = _divmod(b, f)
        c, _ = _divmod(d, f)
        d = _trim([ci - bi for ci, bi in itertools.zip_longest(c, _deriv(b), fillvalue=0)])
        if len(f) > 1:
            out.append((f, i))
        i += 1
    return out


# -----------------------------------------------------------------------

def quartic_coefficients(C, assignment: dict) -> list:
    """Exact [Psi_0 .. Psi_4 scaled by binomials]: coefficient of t^j is binom(4, j) C_{0..01..1}."""
    out = []
    for j in range(5):
        idx = (0,) * (4 - j) + (1,) * j
        comp = C[idx]
        v = comp.eval_exact(assignment) if comp else 0
        out.append(math.comb(4, j) * v)
    return out


@dataclass
class PointPattern:
    point: NumericPoint
    pattern: tuple[int, ...]
    label: str
    coefficients: list = field(default_factory=list)
    numeric_agrees: bool = True
    resampled: int = 0

    def to_json(self) -> dict:
        return {
            "point": self.point.to_json(),
            "pattern": list(self.pattern),
            "label": self.label,
            "numeric_agrees": self.numeric_agrees,
        }


def multiplicity_pattern(coeffs: list) -> tuple[tuple[int, ...], bool]:
    """Root multiplicities (exact) and whether numeric clustering agrees."""
    p = _trim(coeffs)
    if not p:
        return (), True
    deg = len(p) - 1
    mults = []
    numeric_mults = []
    for f, m in square_free_parts(p):
        nroots = len(f) - 1
        mults.extend([m] * nroots)
        if nroots:
            roots = np.roots([to_complex(c) for c in reversed(f)])
            numeric_mults.append((roots, m))
    if deg < 4:
        mults.append(4 - deg)
    pattern = tuple(sorted(mults, reverse=True))
    # cross-check: all distinct roots separated beyond the cluster tolerance
    pts = []
    for roots, m in numeric_mults:
        pts.extend(roots)
    agrees = True
    for r1, r2 in itertools.combinations(pts, 2):
        scale = max(1.0, abs(r1), abs(r2))
        if abs(r1 - r2) <= CLUSTER_TOL * scale:
            agrees = False
    return pattern, agrees


def _rationalise(pt: NumericPoint) -> dict:
    return {k: coerce(v) for k, v in pt.values.items()}


def sample_points(theta, n: int, seed: int = 0) -> list[NumericPoint]:
    """Random points away from the poles of the Weyl spinor and of Theta."""
    geo = _geo(theta)
    C = geo.weyl_direct
    avoid = [c for _, c in C.items() if c] + [theta.theta0, theta.theta1]
    names = set()
    for e in avoid:
        names |= e.support()
    names |= {"w", "z", "x", "y"}
    names = sorted(n_ for n_ in names if not n_.startswith("_"))
    rng = random.Random(seed)
    return [random_point(rng, names, avoid) for _ in range(n)]


@dataclass
class PetrovVerdict:
    per_point: list[PointPattern]
    label: str
    consistent: bool
    failed_points: int = 0

    @property
    def patterns(self) -> list[tuple[int, ...]]:
        return [p.pattern for p in self.per_point]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "consistent": self.consistent,
            "patterns": [list(p) for p in self.patterns],
            "labels": [p.label for p in self.per_point],
            "failed_points": self.failed_points,
        }


def petrov_classify(theta, points: list[NumericPoint] | None = None, seed: int = 0,
                    n_points: int = 5) -> PetrovVerdict:
    """Classify at the given points (random ones when ``points`` is None)."""
    geo = _geo(theta)
    C = geo.weyl_direct
    if points is None:
        points = sample_points(geo.theta, n_points, seed)
    if len(points) < 3:
        raise PetrovError("need at least three sample points")
    rng = random.Random(seed + 7919)
    records = []
    failed = 0
    for pt in points:
        resampled = 0
        cur = pt
        while True:
            try:
                coeffs = quartic_coefficients(C, _rationalise(cur))
            except (PoleError, ZeroDivisionError):
                coeffs = None
            if coeffs is not None:
                lead, trail = abs(to_complex(coeffs[4])), abs(to_complex(coeffs[0]))
                ill = 0 < lead < TINY and 0 < trail < TINY
                if not ill:
                    break
            if resampled >= 20:
                coeffs = None
                break
            resampled += 1
            names = sorted(cur.values)
            cur = random_point(rng, names, [c for _, c in C.items() if c])
        if coeffs is None:
            failed += 1
            continue
        pattern, agrees = multiplicity_pattern(coeffs)
        records.append(PointPattern(cur, pattern, petrov_label(pattern), coeffs, agrees, resampled))
    if not records:
        raise PetrovError("every sample point hit a curvature pole")
    counts = Counter(r.label for r in records)
    label, _ = counts.most_common(1)[0]
    return PetrovVerdict(records, label, consistent=len(counts) == 1, failed_points=failed)
