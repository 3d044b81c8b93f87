from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhverify.expr import ZERO, parse_expr, var
from hhverify.forms import (
    DifferentialForm,
    VectorFieldOperator,
    basis_one_form,
    cartan_lie_derivative,
    commutator,
    exterior_d,
    interior,
    lie_derivative_coeff,
    wedge,
)
from hhverify.spinors import (
    CHART,
    EPS,
    SpinorField,
    contract,
    epsilon,
    lower_all,
    raise_all,
    raise_lower,
    spin_frame,
    symmetrize,
)

from test_kernel import random_expr

seeds = st.integers(min_value=0, max_value=10**6)


def _form(rng, degree):
    comps = {}
    for key in itertools.combinations(range(4), degree):
        if rng.random() < 0.6:
            comps[key] = random_expr(rng, depth=1)
    return DifferentialForm(degree, comps)


def _vector(rng):
    return VectorFieldOperator([random_expr(rng, depth=1) for _ in range(4)])


def _light_coeff(rng):
    # short polynomial over one linear factor keeps nested brackets small
    vs = ("w", "z", "x", "y")
    top = sum((var(rng.choice(vs)) * rng.randint(-3, 3) for _ in range(2)), ZERO) + rng.randint(1, 3)
    if rng.random() < 0.5:
        return top
    return top / (var(rng.choice(vs)) + rng.randint(1, 3))


def _light_vector(rng):
    return VectorFieldOperator([_light_coeff(rng) for _ in range(4)])


# spinors ---------------------------------------------------------------------

def test_epsilon_identities():
    e_dn = epsilon("unprimed", "down")
    e_up = epsilon("unprimed", "up")
    # eps^{AC} eps_{BC} = delta^A_B
    for A, B in itertools.product((0, 1), repeat=2):
        s = sum(EPS[A][C] * EPS[B][C] for C in (0, 1))
        assert s == (1 if A == B else 0)
    assert e_dn[0, 1] == 1 and e_up[0, 1] == 1


def test_raise_then_lower_is_identity():
    psi = SpinorField("_A _B'", [var("w"), var("x"), parse_expr("2*y"), var("z")])
    back = lower_all(raise_all(psi))
    assert back == psi


def test_nw_se_rule_on_a_single_index():
    psi = SpinorField("_A", [var("x"), var("y")])
    up = raise_lower(psi, 0, "up")
    # psi^0 = psi_1, psi^1 = -psi_0
    assert up[0] == var("y") and up[1] == -var("x")
    # psi_A psi^A vanishes for a single spinor
    assert (psi[0] * up[0] + psi[1] * up[1]).is_zero()


def test_spin_frame_normalisation():
    f = spin_frame()
    o_up, i_up, o_dn = f["o^"], f["iota^"], f["o_"]
    assert (o_up[0], o_up[1]) == (1, 0)
    assert (o_dn[0], o_dn[1]) == (0, 1)
    # o_{A'} iota^{A'} = 1
    assert o_dn[0] * i_up[0] + o_dn[1] * i_up[1] == 1


def test_symmetrize_and_contract():
    t = SpinorField.from_function("_A _B", lambda a, b: var("x") if (a, b) == (0, 1) else ZERO)
    s = symmetrize(t)
    assert s[0, 1] == s[1, 0] == var("x") / 2
    mixed = SpinorField.from_function("^A _B", lambda a, b: 1 if a == b else 0)
    assert contract(mixed, 0, 1)[()] == 2
    with pytest.raises(ValueError):
        contract(t, 0, 1)


def test_coordinate_chart():
    assert CHART.coordinate(0, 0) == var("y")
    assert CHART.coordinate(1, 0) == -var("x")
    assert CHART.coordinate(0, 1) == var("w")
    assert CHART.coordinate(1, 1) == var("z")


def test_slot_mismatch_errors():
    a = SpinorField("_A", [1, 2])
    b = SpinorField("_A'", [1, 2])
    with pytest.raises(ValueError):
        a + b
    with pytest.raises(ValueError):
        SpinorField("_A", [1, 2, 3])


# forms -----------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(min_value=0, max_value=2))
def test_d_squared_vanishes(seed, degree):
    a = _form(random.Random(seed), degree)
    assert exterior_d(exterior_d(a)).is_zero()


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_leibniz_rule_for_d(seed):
    rng = random.Random(seed)
    a, b = _form(rng, 1), _form(rng, 1)
    lhs = exterior_d(wedge(a, b))
    rhs = wedge(exterior_d(a), b) - wedge(a, exterior_d(b))
    assert lhs == rhs


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_jacobi_identity(seed):
    rng = random.Random(seed)
    u, v, w = _light_vector(rng), _light_vector(rng), _light_vector(rng)
    total = commutator(u, commutator(v, w)) + commutator(v, commutator(w, u)) + commutator(w, commutator(u, v))
    assert total.is_zero()


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=2))
def test_cartan_formula_matches_coefficient_formula(seed, degree):
    rng = random.Random(seed)
    v = _vector(rng)
    a = _form(rng, degree)
    assert cartan_lie_derivative(v, a) == lie_derivative_coeff(v, a)


def test_wedge_antisymmetry_and_interior():
    dx, dy = basis_one_form("x"), basis_one_form("y")
    assert wedge(dx, dy) == -wedge(dy, dx)
    assert wedge(dx, dx).is_zero()
    v = VectorFieldOperator([0, 0, 1, 0])
    assert interior(v, wedge(dx, dy)) == dy
    with pytest.raises(ValueError):
        DifferentialForm(2, {(0,): 1})
