from __future__ import annotations

import json
from pathlib import Path

import pytest

from hhverify import __version__
from hhverify.cli import main
from hhverify.families import FamilySpec, make_family
from hhverify.geometry import PotentialPair
from hhverify.report import CHECK_ORDER, DEFAULT_CHECKS, SelectionError, parse_selection, run_checks

GOLDEN = Path(__file__).parent / "golden"


def test_report_matches_golden():
    spec = FamilySpec("monomial", 3, 3)
    rep = run_checks(make_family(spec), "det,pde,invariant", seed=0, points=3, family=spec).to_json()
    assert rep.pop("version") == __version__
    want = json.loads((GOLDEN / "monomial_3_3_det_pde_invariant.json").read_text())
    want.pop("version")
    assert rep == want
    assert list(rep) == [k for k in want]


def test_report_is_deterministic():
    th = PotentialPair.parse("-x*y", "0")
    a = run_checks(th, "all", seed=4).dumps()
    b = run_checks(th, "all", seed=4).dumps()
    assert a == b


def test_selection_parsing():
    assert parse_selection(None) == DEFAULT_CHECKS
    assert parse_selection("all") == CHECK_ORDER
    assert parse_selection("lax,det") == ("det", "lax")
    with pytest.raises(SelectionError):
        parse_selection("det,bogus")


def test_every_shipped_family_passes_everything(solution):
    rep = run_checks(solution, "all", points=3)
    bad = [(r.name, r.detail) for r in rep.records if r.status != "pass"]
    assert not bad
    for r in rep.records:
        if r.name != "petrov":
            assert r.zero and r.size == 0


def test_negative_control_report(non_solution):
    rep = run_checks(non_solution, "all", points=3)
    status = {r.name: r.status for r in rep.records}
    assert status["det"] == "pass"
    for name in ("pde", "lax", "eq-system", "nijenhuis"):
        assert status[name] == "fail"
    assert rep.record("pde").max_abs > 0
    assert rep.record("lax").detail["identity_holds"]
    assert not rep.passed


def test_single_entry_report():
    rep = run_checks(PotentialPair.parse("x^2*w", "z/y"), "det")
    assert [r.name for r in rep.records] == ["det"]


def test_human_table():
    rep = run_checks(make_family(FamilySpec("flat")), "det,pde")
    text = rep.human()
    assert text.splitlines()[-1] == "PASS"
    assert "det" in text and "pde" in text


# CLI ---------------------------------------------------------------------------------

def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_family_hk_example(capsys):
    code, out, _ = _run(["family", "--name", "special-monomial", "--k", "1", "--l", "0", "--m", "0",
                         "--n", "1", "--a", "1", "--b", "-1", "--checks", "all"], capsys)
    assert code == 0
    rep = json.loads(out)
    hk = next(c for c in rep["checks"] if c["name"] == "hyper-kahler")
    assert hk["status"] == "pass"


def test_cli_check_example(capsys):
    code, out, _ = _run(["check", "--theta0", "x^2", "--theta1", "0", "--checks", "pde,lax"], capsys)
    assert code == 0
    assert [c["name"] for c in json.loads(out)["checks"]] == ["pde", "lax"]


def test_cli_check_failure_exit(capsys):
    code, out, _ = _run(["check", "--theta0=-x*y", "--checks", "pde"], capsys)
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_cli_residue_example(capsys):
    code, out, _ = _run(["residue", "--k", "0", "--l", "0", "--a", "1", "--verify"], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["components"][0]["theta"] == "1/(w*x + z*y)"
    assert body["components"][0]["equals_elementary_state"] is True


def test_cli_residue_binomial_mismatch(capsys):
    code, _, _ = _run(["residue", "--k", "1", "--l", "2", "--verify"], capsys)
    assert code == 1
    code, _, _ = _run(["residue", "--k", "1", "--l", "2", "--verify", "--normalised", "--contour",
                       "--points", "2"], capsys)
    assert code == 0


def test_cli_classify(capsys):
    code, out, _ = _run(["classify", "--name", "eguchi-hanson", "--points", "3"], capsys)
    assert code == 0
    assert json.loads(out)["label"] == "D"


def test_cli_file_input_and_out(tmp_path, capsys):
    src = tmp_path / "in.json"
    src.write_text(json.dumps({"family": {"name": "monomial", "k": 3, "l": 4}}))
    out = tmp_path / "rep.json"
    code, stdout, _ = _run(["check", "--file", str(src), "--checks", "det,pde", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    rep = json.loads(out.read_text())
    assert rep["input"]["family"]["l"] == 4

    src.write_text(json.dumps({"theta0": "a*x^3", "theta1": "b*y^2"}))
    code, stdout, _ = _run(["check", "--file", str(src), "--theta1", "0", "--checks", "pde"], capsys)
    assert code == 0
    assert json.loads(stdout)["input"]["theta1"] == "0"


@pytest.mark.parametrize("argv", [
    ["check", "--theta0", "x^^2"],
    ["check", "--theta0", "q*x"],
    ["check", "--theta0", "1/(x-x)"],
    ["check", "--theta0", "x", "--checks", "nope"],
    ["family", "--name", "monomial", "--k", "3"],
    ["check"],
    ["frobnicate"],
    ["classify", "--name", "flat", "--points", "2"],
])
def test_cli_usage_errors(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 2
    assert err


def test_cli_bad_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = _run(["check", "--file", str(p)], capsys)
    assert code == 2 and "cannot read" in err
