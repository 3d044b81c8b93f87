from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from hhverify.expr import (
    ONE,
    ZERO,
    DivisionByZeroError,
    GaussianRational,
    NumericPoint,
    ParseError,
    PoleError,
    RationalExpr,
    UnknownIdentifierError,
    const,
    parse_expr,
    var,
)
from hhverify.expr.coeffs import coerce

VARS = ("w", "z", "x", "y")


# random expressions --------------------------------------------------------

def _poly(draw_int, draw_var, nterms):
    acc = ZERO
    for _ in range(nterms):
        t = const(draw_int())
        for _ in range(random.randint(0, 3)):
            t = t * var(draw_var())
        acc = acc + t
    return acc


def random_expr(rng: random.Random, depth: int = 2) -> RationalExpr:
    """Small random rational function with a few distinct denominators."""
    def mono():
        t = const(rng.randint(-4, 4) or 1)
        for _ in range(rng.randint(0, 2)):
            t = t * var(rng.choice(VARS))
        return t

    def poly(n):
        acc = ZERO
        for _ in range(n):
            acc = acc + mono()
        return acc

    e = poly(rng.randint(1, 3))
    for _ in range(depth):
        d = poly(rng.randint(1, 3)) + const(rng.randint(1, 3))
        if not d:
            continue
        op = rng.choice("+*/")
        if op == "+":
            e = e + poly(2) / d
        elif op == "*":
            e = e * d
        else:
            e = e / d
    return e


exprs = st.integers(min_value=0, max_value=10**6).map(lambda s: random_expr(random.Random(s)))


def _rand_point(rng):
    return NumericPoint({v: complex(rng.uniform(0.5, 2), rng.uniform(-1, 1)) for v in VARS})


# coefficients ----------------------------------------------------------------

def test_gaussian_rational_demotes_to_rational():
    g = GaussianRational(1, 2)
    r = g * g.conjugate()
    assert isinstance(r, type(mpq(1))) and r == 5
    assert (g - g) == 0
    assert coerce(0.5) == mpq(1, 2)
    assert coerce(complex(0.25, -1)) == GaussianRational(mpq(1, 4), -1)


def test_constant_arithmetic_is_exact():
    third = const(1) / 3
    assert third + third + third == ONE
    assert const(Fraction(2, 7)) * 7 == const(2)
    i = parse_expr("i")
    assert i * i == const(-1)


# ring and field laws -------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(exprs, exprs, exprs)
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


@settings(max_examples=40, deadline=None)
@given(exprs, exprs)
def test_division_inverts_multiplication(a, b):
    if b.is_zero():
        return
    assert (a * b) / b == a
    assert b * b.reciprocal() == ONE


@settings(max_examples=40, deadline=None)
@given(exprs, exprs, st.sampled_from(VARS))
def test_derivation_law(a, b, v):
    assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)
    assert (a + b).diff(v) == a.diff(v) + b.diff(v)


@settings(max_examples=30, deadline=None)
@given(exprs, st.sampled_from(VARS), st.sampled_from(VARS))
def test_mixed_partials_commute(a, u, v):
    assert a.diff(u).diff(v) == a.diff(v).diff(u)


def test_derivative_matches_finite_difference():
    rng = random.Random(11)
    h = 1e-6
    checked = 0
    while checked < 50:
        e = random_expr(rng, depth=3)
        v = rng.choice(VARS)
        pt = _rand_point(rng)
        try:
            exact = e.diff(v).eval_numeric(pt)
            fp = e.eval_numeric(pt.with_values(**{v: pt[v] + h}))
            fm = e.eval_numeric(pt.with_values(**{v: pt[v] - h}))
        except PoleError:
            continue
        fd = (fp - fm) / (2 * h)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))
        checked += 1


# canonical form ------------------------------------------------------------

def test_cancellation_gives_canonical_form():
    D = parse_expr("w*x + z*y")
    e = (D * D * var("w")) / (D ** 3)
    assert e == var("w") / D
    assert parse_expr("(x^2 - y^2)/(x - y)") == parse_expr("x + y")
    assert (parse_expr("1/(x+y)") + parse_expr("1/(x-y)")) == parse_expr("2*x/(x^2 - y^2)")


def test_complex_factorisation_in_denominator():
    # x^2 + y^2 only splits over Q(i)
    e = parse_expr("(x + i*y)/(x^2 + y^2)")
    assert e == parse_expr("1/(x - i*y)")


def test_substitution_and_exact_evaluation():
    e = parse_expr("a*w^2*z/(w*x+z*y)^3")
    s = e.substitute({"a": 2, "w": var("x")})
    assert s == parse_expr("2*x^2*z/(x^2+z*y)^3")
    v = e.eval_exact({"a": 1, "w": 1, "z": 1, "x": 1, "y": 1})
    assert v == mpq(1, 8)


# parser ----------------------------------------------------------------------

def test_parse_examples():
    assert parse_expr("a*w^2*z/(w*x+z*y)^3").support() == {"a", "w", "z", "x", "y"}
    assert parse_expr("(w*x+z*y)^(-1)") == ONE / parse_expr("w*x+z*y")
    assert parse_expr("x**2") == parse_expr("x^2")
    assert parse_expr("-x^2") == -(var("x") ** 2)


@pytest.mark.parametrize("text, exc", [
    ("x^", ParseError),
    ("(x+y", ParseError),
    ("x $ y", ParseError),
    ("x^y", ParseError),
    ("q*x", UnknownIdentifierError),
    ("x/(y-y)", DivisionByZeroError),
    ("1/0", DivisionByZeroError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_expr(text)


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_expr("x + * y")
    assert info.value.pos == 4


@settings(max_examples=60, deadline=None)
@given(exprs)
def test_print_parse_round_trip(e):
    assert parse_expr(str(e)) == e


def test_complex_coefficients_round_trip():
    e = parse_expr("(1+2*i)*x/(y - i)")
    assert parse_expr(str(e)) == e


def test_pole_error_near_denominator_zero():
    e = parse_expr("1/(x - y)")
    with pytest.raises(PoleError):
        e.eval_numeric(NumericPoint({"x": 1, "y": 1}))
    assert math.isclose(abs(e.eval_numeric(NumericPoint({"x": 2, "y": 1}))), 1.0)
