"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (also collected in the terminal
summary).  Tolerances and time budgets are pinned below.
"""
from __future__ import annotations

import itertools
import random

from hhverify.expr import PoleError, const, random_point, var
from hhverify.families import (
    FamilySpec,
    euclidean_slice_points,
    hk_scalar,
    hk_scalar_unnormalised,
    khl_invariant,
    make_family,
)
from hhverify.forms import commutator, exterior_d
from hhverify.geometry import (
    PotentialPair,
    build_geometry,
    eq_system_residuals,
    hypereq_residual,
    lax_coefficients,
    lax_commutator,
    lax_identity_residual,
    lee_structure_residual,
    maxwell_check,
    structure_equation_residual,
    weyl_invariant,
)
from hhverify.petrov import CLUSTER_TOL, petrov_classify
from hhverify.symmetries import hyper_kahler_reduction, pure_gauge_variation
from hhverify.twistor import TwistorComponent, TwistorFunctionSpec, contour_oracle, residue_potentials, residue_theta

from test_kernel import VARS, random_expr
from test_spinors_forms import _form, _light_vector
from test_symmetries import random_generator

FD_STEP = 1e-6
FD_TOL = 1e-6
CONTOUR_TOL = 1e-8
CONTOUR_SAMPLES = 256
RANDOM_POINTS = 5

SWEEP = (
    [FamilySpec("monomial", k, l) for k in range(7) for l in range(7)]
    + [FamilySpec("special-monomial", *e) for e in itertools.product(range(4), repeat=4)]
    + [FamilySpec("sparling-tod"), FamilySpec("eguchi-hanson")]
)
CONTROL = PotentialPair.parse("-x*y", "0")  # Theta_0 = x^0 x^1

_geo_cache: dict = {}


def _geometry(spec):
    if spec not in _geo_cache:
        _geo_cache[spec] = build_geometry(make_family(spec))
    return _geo_cache[spec]


def _all_zero(items) -> bool:
    return all(not e for e in items)


# 1 ---------------------------------------------------------------------------------------

def three_halves_invariant(k: int, l: int):
    """(3/2) a b k(k-1)(k-2) l(l-1)(l-2) x^{l-3} y^{k-3}."""
    c = const(3 * k * (k - 1) * (k - 2) * l * (l - 1) * (l - 2)) / 2
    return var("a") * var("b") * c * var("x") ** (l - 3) * var("y") ** (k - 3)


def test_criterion_1_invariant_reproduction(criterion):
    pairs = list(itertools.product(range(3, 7), repeat=2))
    three_halves = half = 0
    for k, l in pairs:
        spec = FamilySpec("monomial", k, l)
        inv = weyl_invariant(_geometry(spec))
        three_halves += (inv - three_halves_invariant(k, l)).is_zero()
        half += (inv - khl_invariant(spec)).is_zero()
    criterion.done(1, three_halves == len(pairs),
                   f"{three_halves}/{len(pairs)} pairs equal the 3/2 closed form "
                   f"({half}/{len(pairs)} equal the same form with coefficient 1/2)", 10)


# 2 ---------------------------------------------------------------------------------------

def test_criterion_2_field_equation_suite(criterion):
    bad = [s for s in SWEEP if not _all_zero(hypereq_residual(make_family(s)))]
    control = not _all_zero(hypereq_residual(CONTROL))
    criterion.done(2, not bad and control,
                   f"{len(SWEEP) - len(bad)}/{len(SWEEP)} family members solve the equation exactly, "
                   f"control residual nonzero: {control}", 30)


# 3 ---------------------------------------------------------------------------------------

def test_criterion_3_lax_equivalence(criterion):
    bad = []
    for s in SWEEP:
        geo = _geometry(s)
        coeffs = lax_coefficients(lax_commutator(geo))
        eqs = eq_system_residuals(geo)
        ok = all(v.is_zero() for v in coeffs.values())
        ok = ok and all(v.is_zero() for d in eqs.values() for v in d.values())
        ok = ok and lax_identity_residual(geo).is_zero()
        if not ok:
            bad.append(s)
    off_shell = lax_identity_residual(CONTROL).is_zero()
    criterion.done(3, not bad and off_shell,
                   f"{len(SWEEP) - len(bad)}/{len(SWEEP)} members with vanishing lambda-coefficients, "
                   f"identity also holds off shell: {off_shell}", 30)


# 4 ---------------------------------------------------------------------------------------

def _structure_failures(geo) -> list[str]:
    out = []
    if not all(f.is_zero() for f in lee_structure_residual(geo).values()):
        out.append("lee")
    if not all(f.is_zero() for f in structure_equation_residual(geo).values()):
        out.append("cartan")
    if not (geo.det_g - 1).is_zero():
        out.append("det")
    m = maxwell_check(geo)
    if not m["phi_tilde"].is_zero():
        out.append("phi_tilde")
    if not m["A_norm"].is_zero():
        out.append("A.A")
    if not m["A_divergence"].is_zero():
        out.append("div A")
    if not geo.curvature["primed"]["weyl"].is_zero():
        out.append("primed weyl")
    if not geo.curvature["unprimed"]["R"].is_zero():
        out.append("R")
    return out


def test_criterion_4_structure_identities(criterion):
    failures = {}
    for s in SWEEP:
        f = _structure_failures(_geometry(s))
        if f:
            failures[s] = f
    criterion.done(4, not failures,
                   f"{len(SWEEP) - len(failures)}/{len(SWEEP)} members satisfy all eight identities"
                   + (f"; first failure {next(iter(failures.items()))}" if failures else ""), 120)


# 5 ---------------------------------------------------------------------------------------

def test_criterion_5_two_path_weyl(criterion):
    geos = [_geometry(s) for s in SWEEP] + [build_geometry(CONTROL)]
    bad = sum(not (g.curvature["unprimed"]["weyl"] - g.weyl_direct).is_zero() for g in geos)
    criterion.done(5, bad == 0, f"{len(geos) - bad}/{len(geos)} agree (sweep plus control)", 60)


# 6 ---------------------------------------------------------------------------------------

def test_criterion_6_hyper_kahler_reduction(criterion):
    parts = []
    ok = True
    for m, n in ((1, 0), (2, 0), (2, 1)):
        spec = FamilySpec("special-monomial", m - 1, n + 1, m, n, a=1, b=-1)
        theta = make_family(spec)
        v = hyper_kahler_reduction(theta, hk_scalar_unnormalised(spec))
        geo = _geometry(spec)
        null = weyl_invariant(geo).is_zero() and not geo.weyl_direct.is_zero()
        fixed = hyper_kahler_reduction(theta, hk_scalar(spec))
        this = v.divergence_free and v.gradient_ok and v.heavenly_ok and null
        ok = ok and this
        parts.append(f"(m,n)=({m},{n}) div={v.divergence_free} grad={v.gradient_ok} "
                     f"heavenly={v.heavenly_ok} null={null} [scalar/(k+l): grad={fixed.gradient_ok}]")
    criterion.done(6, ok, "; ".join(parts), 30)


# 7 ---------------------------------------------------------------------------------------

def test_criterion_7_residue_twistor(criterion):
    grid = list(itertools.product(range(4), repeat=4))
    match = sum(residue_potentials(TwistorFunctionSpec.monomial(*e)) == make_family(FamilySpec("special-monomial", *e))
                for e in grid)
    # diagnostic only: dividing each h by binom(k+l, k) restores agreement
    normalised = sum(residue_potentials(TwistorFunctionSpec.monomial(*e, normalised=True))
                     == make_family(FamilySpec("special-monomial", *e)) for e in grid)
    rng = random.Random(2024)
    worst = 0.0
    for _ in range(RANDOM_POINTS):
        k, l, m, n = (rng.randint(0, 3) for _ in range(4))
        spec = TwistorFunctionSpec.monomial(k, l, m, n)
        for comp in (spec.h0, spec.h1):
            th = residue_theta(comp)
            pt = random_point(rng, ["w", "z", "x", "y", "a", "b"], [th])
            ex = th.eval_numeric(pt)
            worst = max(worst, abs(contour_oracle(comp, pt, CONTOUR_SAMPLES) - ex) / abs(ex))
    contour_ok = worst <= CONTOUR_TOL
    criterion.done(7, match == len(grid) and contour_ok,
                   f"{match}/{len(grid)} grid cases equal the elementary states "
                   f"({normalised}/{len(grid)} after dividing h by binom(k+l, k)); "
                   f"contour max relative error {worst:.2e} (tol {CONTOUR_TOL:g})", 60)


# 8 ---------------------------------------------------------------------------------------

def test_criterion_8_classification(criterion):
    cases = [("eguchi-hanson", make_family(FamilySpec("eguchi-hanson")), "D", None),
             ("eguchi-hanson euclidean slice", make_family(FamilySpec("eguchi-hanson")), "D",
              euclidean_slice_points(RANDOM_POINTS, seed=8))]
    for m, n in ((1, 0), (2, 0), (2, 1)):
        cases.append((f"hyper-kahler ({m},{n})",
                      make_family(FamilySpec("special-monomial", m - 1, n + 1, m, n, a=1, b=-1)), "N", None))
    cases.append(("flat", make_family(FamilySpec("flat")), "O", None))
    ok = True
    got = []
    for name, theta, want, pts in cases:
        v = petrov_classify(theta, pts, seed=8, n_points=RANDOM_POINTS)
        this = v.label == want and v.consistent and all(p.numeric_agrees for p in v.per_point)
        ok = ok and this and len(v.per_point) == RANDOM_POINTS
        got.append(f"{name}={v.label}")
    criterion.done(8, ok, ", ".join(got) + f" (cluster tol {CLUSTER_TOL:g})", 30)


# 9 ---------------------------------------------------------------------------------------

def test_criterion_9_gauge_property(criterion):
    theta = make_family(FamilySpec("monomial", 3, 4))
    good = 0
    for seed in (1, 2, 3):
        out = pure_gauge_variation(theta, random_generator(seed))
        ok = all(c.is_zero() for row in out["metric_variation_residual"] for c in row)
        ok = ok and out["lie_sigma_11"].is_zero()
        ok = ok and all(c.is_zero() for row in out["lie_J10"] for c in row)
        ok = ok and all(r.is_zero() for r in out["linearized_field_equation"])
        good += ok
    criterion.done(9, good == 3, f"{good}/3 random generators act as exact symmetries", 60)


# 10 --------------------------------------------------------------------------------------

def test_criterion_10_kernel_health(criterion):
    rng = random.Random(10)
    fd_ok = 0
    tried = 0
    while tried < 50:
        e = random_expr(rng, depth=3)
        v = rng.choice(VARS)
        pt = random_point(rng, list(VARS))
        try:
            exact = e.diff(v).eval_numeric(pt)
            fp = e.eval_numeric(pt.with_values(**{v: pt[v] + FD_STEP}))
            fm = e.eval_numeric(pt.with_values(**{v: pt[v] - FD_STEP}))
        except PoleError:
            continue
        tried += 1
        fd_ok += abs((fp - fm) / (2 * FD_STEP) - exact) <= FD_TOL * max(1.0, abs(exact))
    d2 = sum(exterior_d(exterior_d(_form(rng, deg))).is_zero() for deg in (0, 1, 2) for _ in range(10))
    jac = 0
    for _ in range(10):
        u, v, w = _light_vector(rng), _light_vector(rng), _light_vector(rng)
        total = commutator(u, commutator(v, w)) + commutator(v, commutator(w, u)) + commutator(w, commutator(u, v))
        jac += total.is_zero()
    criterion.done(10, fd_ok == 50 and d2 == 30 and jac == 10,
                   f"finite differences {fd_ok}/50 within {FD_TOL:g}, d^2=0 {d2}/30, Jacobi {jac}/10", 30)
