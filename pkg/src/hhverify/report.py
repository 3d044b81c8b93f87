"""Check orchestration and the JSON report."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from . import __version__
from .expr import PoleError, RationalExpr, random_point
from .families import FamilySpec, hk_scalar, hk_scalar_unnormalised, is_hk_parameters, khl_invariant
from .forms import DifferentialForm, VectorFieldOperator
from .geometry import (
    GeometryBundle,
    PotentialPair,
    build_geometry,
    endomorphism,
    eq_system_residuals,
    hypereq_residual,
    lax_coefficients,
    lax_commutator,
    lax_identity_residual,
    lee_structure_residual,
    maxwell_check,
    mat_mul,
    nijenhuis,
    special_case_residuals,
    structure_equation_residual,
    weyl_invariant_of,
)
from .spinors import SpinorField
from .symmetries import first_integral_obstruction, hyper_kahler_reduction

__all__ = ["CHECK_ORDER", "DEFAULT_CHECKS", "CheckRecord", "CheckReport", "run_checks", "parse_selection",
           "convention_fingerprint", "SelectionError"]

CHECK_ORDER = (
    "det", "pde", "special-case", "eq-system", "lax", "nijenhuis", "lee-structure", "structure-eq",
    "maxwell", "gauduchon", "curvature", "invariant", "hyper-kahler", "first-integral", "petrov",
)
DEFAULT_CHECKS = tuple(c for c in CHECK_ORDER if c != "petrov")
SCHEMA_VERSION = 1


class SelectionError(ValueError):
    pass


def parse_selection(text: str | None) -> tuple[str, ...]:
    if text is None or text == "":
        return DEFAULT_CHECKS
    if text.strip() == "all":
        return CHECK_ORDER
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [n for n in names if n not in CHECK_ORDER]
    if bad:
        raise SelectionError(f"unknown check(s): {', '.join(bad)}")
    return tuple(c for c in CHECK_ORDER if c in names)


def convention_fingerprint() -> dict:
    return {
        "eps_01": 1,
        "eps^01": 1,
        "index_rule": "psi^A = eps^{AB} psi_B, psi_B = psi^A eps_{AB}",
        "x^A": ["y", "-x"],
        "w^A": ["w", "z"],
        "o^A'": [1, 0],
        "lee": "dSigma^{A'B'} = -A ^ Sigma^{A'B'}",
    }


# residual flattening ------------------------------------------------------

def _flatten(obj):
    if isinstance(obj, RationalExpr):
        yield obj
    elif isinstance(obj, DifferentialForm):
        yield from obj.comps.values()
    elif isinstance(obj, VectorFieldOperator):
        yield from obj.coeffs
    elif isinstance(obj, SpinorField):
        for _, c in obj.items():
            yield c
    elif isinstance(obj, dict):
        for v in obj.values():
            yield from _flatten(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            yield from _flatten(v)


@dataclass
class CheckRecord:
    name: str
    status: str
    zero: bool | None = None
    size: int = 0
    max_abs: float | None = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "residual": {"zero": self.zero, "size": self.size, "max_abs": self.max_abs},
            "detail": self.detail,
        }


@dataclass
class CheckReport:
    records: list[CheckRecord]
    input: dict
    seed: int
    points: int

    @property
    def passed(self) -> bool:
        return all(r.status != "fail" for r in self.records)

    def record(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "tool": "hhverify",
            "version": __version__,
            "conventions": convention_fingerprint(),
            "input": self.input,
            "seed": self.seed,
            "points": self.points,
            "passed": self.passed,
            "checks": [r.to_json() for r in self.records],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)

    def human(self) -> str:
        w = max(len(r.name) for r in self.records) if self.records else 4
        lines = [f"{'check'.ljust(w)}  status  zero   size  max|res|"]
        for r in self.records:
            mx = "-" if r.max_abs is None else f"{r.max_abs:.3g}"
            z = "-" if r.zero is None else ("yes" if r.zero else "no")
            lines.append(f"{r.name.ljust(w)}  {r.status:<6}  {z:<5}  {r.size:>4}  {mx}")
        for r in self.records:
            for k, v in r.detail.items():
                if isinstance(v, str) and len(v) < 300:
                    lines.append(f"  {r.name}.{k}: {v}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


# checks -------------------------------------------------------------------

class _Context:
    def __init__(self, theta: PotentialPair, family: FamilySpec | None, seed: int, npoints: int):
        self.theta = theta
        self.family = family
        self.seed = seed
        self.npoints = npoints
        self.geo: GeometryBundle = build_geometry(theta)
        self._points = None

    def points(self):
        if self._points is None:
            names = set(self.theta.theta0.support()) | set(self.theta.theta1.support()) | {"w", "z", "x", "y"}
            names = sorted(n for n in names if not n.startswith("_"))
            rng = random.Random(self.seed)
            avoid = [e for e in (self.theta.theta0, self.theta.theta1) if e]
            self._points = [random_point(rng, names + ["lam"], avoid) for _ in range(self.npoints)]
        return self._points


def _summarise(name: str, ctx: _Context, residuals, detail=None, extra_ok: bool = True) -> CheckRecord:
    exprs = list(_flatten(residuals))
    nonzero = [e for e in exprs if e]
    zero = not nonzero
    size = sum(e.nterms() for e in nonzero)
    mx = None
    if nonzero:
        mx = 0.0
        for pt in ctx.points():
            for e in nonzero:
                try:
                    mx = max(mx, abs(e.eval_numeric(pt)))
                except (PoleError, KeyError):
                    continue
    status = "pass" if zero and extra_ok else "fail"
    return CheckRecord(name, status, zero, size, mx, detail or {})


def _check_det(ctx):
    res = [ctx.geo.det_g - 1, ctx.geo.duality_residual()]
    return _summarise("det", ctx, res, {"det_g": str(ctx.geo.det_g)})


def _check_pde(ctx):
    return _summarise("pde", ctx, hypereq_residual(ctx.geo))


def _check_special(ctx):
    lin, non = special_case_residuals(ctx.geo)
    return _summarise("special-case", ctx, [lin, non])


def _check_eq_system(ctx):
    return _summarise("eq-system", ctx, eq_system_residuals(ctx.geo))


def _check_lax(ctx):
    coeffs = lax_coefficients(lax_commutator(ctx.geo))
    ident = lax_identity_residual(ctx.geo)
    detail = {"nonzero_powers": [p for p, v in coeffs.items() if not v.is_zero()],
              "identity_holds": ident.is_zero()}
    return _summarise("lax", ctx, list(coeffs.values()), detail, extra_ok=ident.is_zero())


def _check_nijenhuis(ctx):
    res = {}
    for Ap, Bp in ((0, 0), (0, 1), (1, 0), (1, 1)):
        res[f"{Ap}{Bp}"] = nijenhuis(ctx.geo, Ap, Bp)
    J = endomorphism(ctx.geo, 1, 0)
    sq = mat_mul(J, J)
    return _summarise("nijenhuis", ctx, [res, sq])


def _check_lee(ctx):
    return _summarise("lee-structure", ctx, lee_structure_residual(ctx.geo))


def _check_structure(ctx):
    return _summarise("structure-eq", ctx, structure_equation_residual(ctx.geo))


def _maxwell(ctx):
    if not hasattr(ctx, "_mx"):
        ctx._mx = maxwell_check(ctx.geo)
    return ctx._mx


def _check_maxwell(ctx):
    m = _maxwell(ctx)
    return _summarise("maxwell", ctx, m["phi_tilde"], {"phi_zero": m["phi"].is_zero()})


def _check_gauduchon(ctx):
    m = _maxwell(ctx)
    return _summarise("gauduchon", ctx, [m["A_norm"], m["A_divergence"]])


def _check_curvature(ctx):
    cu = ctx.geo.curvature["unprimed"]
    cp = ctx.geo.curvature["primed"]
    two_path = cu["weyl"] - ctx.geo.weyl_direct
    return _summarise("curvature", ctx, [cp["weyl"], cu["R"], cp["R"], two_path],
                      {"weyl_zero": ctx.geo.weyl_direct.is_zero()})


def _check_invariant(ctx):
    I = weyl_invariant_of(ctx.geo.weyl_direct)
    I2 = weyl_invariant_of(ctx.geo.curvature["unprimed"]["weyl"])
    res = [I - I2]
    detail = {"expression": str(I)}
    fam = ctx.family
    if fam is not None and fam.tag == "monomial":
        ref = khl_invariant(fam)
        detail["closed_form"] = str(ref)
        res.append(I - ref)
    return _summarise("invariant", ctx, res, detail)


def _check_hk(ctx):
    fam = ctx.family
    cand = hk_scalar(fam) if fam is not None and is_hk_parameters(fam) else None
    v = hyper_kahler_reduction(ctx.theta, cand)
    detail = {"divergence_free": v.divergence_free,
              "verdict": "hyper-kahler" if v.hyper_kahler else "not hyper-kahler"}
    res = []
    if cand is not None:
        detail["scalar"] = str(cand.theta)
        res.extend([v.gradient_residual, v.heavenly_residual])
        unnorm = hyper_kahler_reduction(ctx.theta, hk_scalar_unnormalised(fam))
        detail["unnormalised_scalar_gradient_ok"] = unnorm.gradient_ok
        # the reduction only applies when the divergence vanishes
        res.append(v.divergence)
    return _summarise("hyper-kahler", ctx, res, detail)


def _check_first_integral(ctx):
    obs = first_integral_obstruction(ctx.theta)
    return _summarise("first-integral", ctx, obs)


def _check_petrov(ctx):
    from .petrov import PetrovError, petrov_classify

    try:
        v = petrov_classify(ctx.theta, seed=ctx.seed, n_points=max(ctx.npoints, 3))
    except PetrovError as exc:
        return CheckRecord("petrov", "fail", None, 0, None, {"error": str(exc)})
    detail = v.to_json()
    ok = v.consistent and all(p.numeric_agrees for p in v.per_point)
    return CheckRecord("petrov", "pass" if ok else "fail", None, 0, None, detail)


_CHECKS = {
    "det": _check_det,
    "pde": _check_pde,
    "special-case": _check_special,
    "eq-system": _check_eq_system,
    "lax": _check_lax,
    "nijenhuis": _check_nijenhuis,
    "lee-structure": _check_lee,
    "structure-eq": _check_structure,
    "maxwell": _check_maxwell,
    "gauduchon": _check_gauduchon,
    "curvature": _check_curvature,
    "invariant": _check_invariant,
    "hyper-kahler": _check_hk,
    "first-integral": _check_first_integral,
    "petrov": _check_petrov,
}


def run_checks(theta: PotentialPair, selection=None, seed: int = 0, points: int = 5,
               family: FamilySpec | None = None) -> CheckReport:
    """Run the selected checks in dependency order; failures become report entries."""
    if selection is None or isinstance(selection, str):
        selection = parse_selection(selection)
    sel = [c for c in CHECK_ORDER if c in set(selection)]
    unknown = set(selection) - set(CHECK_ORDER)
    if unknown:
        raise SelectionError(f"unknown check(s): {', '.join(sorted(unknown))}")
    ctx = _Context(theta, family, seed, points)
    records = []
    for name in sel:
        try:
            records.append(_CHECKS[name](ctx))
        except (ArithmeticError, ValueError) as exc:
            records.append(CheckRecord(name, "fail", None, 0, None, {"error": f"{type(exc).__name__}: {exc}"}))
    echo = theta.to_json()
    if family is not None:
        echo = {**echo, "family": family.to_json()}
    return CheckReport(records, echo, seed, points)
