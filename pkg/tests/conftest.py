from __future__ import annotations

import time

import pytest

from hhverify.families import FamilySpec, make_family
from hhverify.geometry import PotentialPair

# the families every identity is exercised on
SOLUTION_SPECS = [
    FamilySpec("monomial", 3, 3),
    FamilySpec("monomial", 4, 6),
    FamilySpec("monomial", 0, 2),
    FamilySpec("special-monomial", 1, 2, 0, 1),
    FamilySpec("special-monomial", 3, 3, 2, 0),
    FamilySpec("sparling-tod"),
    FamilySpec("eguchi-hanson"),
]


def spec_id(s: FamilySpec) -> str:
    parts = [s.tag] + [str(getattr(s, k)) for k in ("k", "l", "m", "n") if getattr(s, k) is not None]
    return "-".join(parts)


@pytest.fixture(params=SOLUTION_SPECS, ids=spec_id)
def solution(request):
    return make_family(request.param)


@pytest.fixture
def non_solution():
    # Theta_0 = x^0 x^1 = -x y
    return PotentialPair.parse("-x*y", "0")


# acceptance reporting -----------------------------------------------------------------

_CRITERIA: dict[int, str] = {}


class CriterionReporter:
    def __init__(self):
        self._t0 = time.perf_counter()

    def done(self, number: int, ok: bool, summary: str, budget: float) -> None:
        elapsed = time.perf_counter() - self._t0
        within = elapsed < budget
        verdict = "PASS" if ok and within else "FAIL"
        line = f"{verdict} criterion {number}: {summary} [{elapsed:.2f}s of {budget:g}s]"
        if not within:
            line += " (over time budget)"
        _CRITERIA[number] = line
        print(line)
        assert ok and within, line


@pytest.fixture
def criterion():
    return CriterionReporter()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[n])
