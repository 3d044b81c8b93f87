from __future__ import annotations

import pytest

from hhverify.expr import NumericPoint
from hhverify.families import FamilySpec, make_family
from hhverify.geometry import PotentialPair
from hhverify.petrov import (
    PetrovError,
    multiplicity_pattern,
    petrov_classify,
    petrov_label,
    sample_points,
)


@pytest.mark.parametrize("coeffs, pattern", [
    ([1, 0, 0, 0, 0], (4,)),               # 1: all four roots at infinity
    ([0, 0, 0, 0, 1], (4,)),               # t^4
    ([0, 0, 1, 0, 0], (2, 2)),             # t^2: 0 and infinity double
    ([1, -4, 6, -4, 1], (4,)),             # (t - 1)^4
    ([0, 1, -2, 1, 0], (2, 1, 1)),         # t (t-1)^2, root at infinity
    ([-1, 3, -3, 1, 0], (3, 1)),           # (t-1)^3
    ([24, -50, 35, -10, 1], (1, 1, 1, 1)),
    ([1, 0, 2, 0, 1], (2, 2)),             # (t^2 + 1)^2 needs complex roots
    ([0, 0, 0, 0, 0], ()),
])
def test_multiplicity_patterns(coeffs, pattern):
    got, agrees = multiplicity_pattern(coeffs)
    assert got == pattern and agrees


def test_labels():
    assert [petrov_label(p) for p in [(1, 1, 1, 1), (2, 1, 1), (2, 2), (3, 1), (4,), ()]] == [
        "I", "II", "D", "III", "N", "O"]


@pytest.mark.parametrize("spec, label", [
    (FamilySpec("eguchi-hanson"), "D"),
    (FamilySpec("special-monomial", 0, 1, 1, 0, a=1, b=-1), "N"),
    (FamilySpec("special-monomial", 1, 2, 2, 1, a=1, b=-1), "N"),
    (FamilySpec("flat"), "O"),
    (FamilySpec("monomial", 3, 3), "I"),
    (FamilySpec("monomial", 3, 3, b=0), "III"),
    (FamilySpec("monomial", 3, 4, a=0), "III"),
    (FamilySpec("monomial", 2, 3), "III"),
])
def test_family_types(spec, label):
    v = petrov_classify(make_family(spec), seed=2)
    assert v.label == label and v.consistent
    assert len(v.per_point) == 5


def test_rescaling_preserves_type():
    th = make_family(FamilySpec("special-monomial", 1, 2, 0, 1, a=1, b=2))
    v1 = petrov_classify(th, seed=4)
    v2 = petrov_classify(th.scale(7), seed=4)
    assert v1.label == v2.label


def test_explicit_points_and_minimum_count():
    th = make_family(FamilySpec("eguchi-hanson"))
    pts = sample_points(th, 3, seed=9)
    assert petrov_classify(th, pts).label == "D"
    with pytest.raises(PetrovError):
        petrov_classify(th, pts[:2])


def test_points_on_poles_are_resampled_or_reported():
    th = PotentialPair.parse("1/(x-1)^4", "0")
    bad = [NumericPoint({"w": 1, "z": 1, "x": 1, "y": 1})] * 3
    v = petrov_classify(th, bad, seed=1)
    assert len(v.per_point) == 3
    assert all(p.resampled >= 1 for p in v.per_point)
    assert all(abs(p.point["x"] - 1) > 1e-6 for p in v.per_point)
