from __future__ import annotations

import random

import pytest

from hhverify.expr import ZERO, const, parse_expr, var
from hhverify.families import FamilySpec, hk_scalar, hk_scalar_unnormalised, make_family
from hhverify.forms import DifferentialForm, exterior_d
from hhverify.geometry import build_geometry, hypereq_residual, weyl_invariant
from hhverify.symmetries import (
    GaugeError,
    GaugeGenerator,
    first_integral_obstruction,
    hyper_kahler_reduction,
    pure_gauge_variation,
    rational_exact_potential,
    second_heavenly_residual,
)


def _random_wz_poly(rng, degree):
    w, z = var("w"), var("z")
    acc = ZERO
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            c = rng.randint(-3, 3)
            if c:
                acc = acc + const(c) * w ** i * z ** j
    return acc


def random_generator(seed: int) -> GaugeGenerator:
    rng = random.Random(seed)
    return GaugeGenerator(
        h=_random_wz_poly(rng, 3),
        g0=_random_wz_poly(rng, 2),
        g1=_random_wz_poly(rng, 2),
        F0=_random_wz_poly(rng, 2),
        F1=_random_wz_poly(rng, 2),
    )


# first integral ----------------------------------------------------------------

def test_first_integral_obstruction_vanishes_on_solutions(solution):
    assert all(o.is_zero() for o in first_integral_obstruction(solution))


def test_first_integral_obstruction_equals_field_equation(non_solution):
    assert first_integral_obstruction(non_solution) == hypereq_residual(non_solution)


# gauge ------------------------------------------------------------------------------

@pytest.mark.parametrize("seed", [1, 2, 3])
def test_pure_gauge_variation_is_a_diffeomorphism(seed):
    theta = make_family(FamilySpec("monomial", 3, 4))
    out = pure_gauge_variation(theta, random_generator(seed))
    assert all(c.is_zero() for row in out["metric_variation_residual"] for c in row)
    assert all(r.is_zero() for r in out["linearized_field_equation"])
    assert out["lie_sigma_11"].is_zero()
    assert all(c.is_zero() for row in out["lie_J10"] for c in row)


def test_gauge_data_must_not_depend_on_x_or_y():
    with pytest.raises(GaugeError):
        GaugeGenerator(h=parse_expr("w*x"))
    with pytest.raises(GaugeError):
        GaugeGenerator(g1=parse_expr("y"))


def test_zero_generator_gives_zero_variation():
    theta = make_family(FamilySpec("monomial", 3, 3))
    out = pure_gauge_variation(theta, GaugeGenerator())
    assert out["delta_theta"].is_zero()
    assert out["vector_field"].is_zero()


# hyper-Kaehler reduction ---------------------------------------------------------

HK_MN = [(1, 0), (2, 0), (2, 1)]


def _hk_spec(m, n):
    return FamilySpec("special-monomial", m - 1, n + 1, m, n, a=1, b=-1)


@pytest.mark.parametrize("m, n", HK_MN)
def test_hk_divergence_and_scalar(m, n):
    spec = _hk_spec(m, n)
    theta = make_family(spec)
    v = hyper_kahler_reduction(theta, hk_scalar(spec))
    assert v.divergence_free
    assert v.gradient_ok and v.heavenly_ok
    assert v.consistent


@pytest.mark.parametrize("m, n, expect", [(1, 0, True), (2, 0, False), (2, 1, False)])
def test_hk_unnormalised_scalar_only_works_when_k_plus_l_is_one(m, n, expect):
    spec = _hk_spec(m, n)
    v = hyper_kahler_reduction(make_family(spec), hk_scalar_unnormalised(spec))
    assert v.gradient_ok is expect


@pytest.mark.parametrize("m, n", HK_MN)
def test_hk_weyl_is_null(m, n):
    geo = build_geometry(make_family(_hk_spec(m, n)))
    assert not geo.weyl_direct.is_zero()
    assert weyl_invariant(geo).is_zero()


@pytest.mark.parametrize("m, n", HK_MN)
def test_hk_lee_form_is_exact(m, n):
    A = build_geometry(make_family(_hk_spec(m, n))).lee_form
    phi = rational_exact_potential(A)
    assert phi is not None
    dphi = DifferentialForm(1, {(mu,): phi.diff(v) for mu, v in enumerate("wzxy")})
    assert dphi == A


def test_non_hk_member_fails_divergence():
    v = hyper_kahler_reduction(make_family(FamilySpec("special-monomial", 1, 0, 0, 1, a=1, b=-1)))
    assert not v.divergence_free
    assert v.consistent  # no scalar supplied, nothing to contradict


def test_monomial_lee_form_not_exact():
    A = build_geometry(make_family(FamilySpec("monomial", 3, 3))).lee_form
    assert not exterior_d(A).is_zero()
    assert rational_exact_potential(A) is None


def test_second_heavenly_on_a_known_solution():
    # Theta = x^3 solves it trivially; a w-linear shift too
    assert second_heavenly_residual(parse_expr("x^3 + w*y")).is_zero()
    assert not second_heavenly_residual(parse_expr("x^2*w*y")).is_zero()
