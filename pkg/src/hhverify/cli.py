"""Command-line front end: ``hhverify {check,family,residue,classify}``.

Exit codes: 0 all executed checks pass, 1 some check failed, 2 usage or
input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys

from . import __version__
from .expr import ParseError, UnknownIdentifierError, random_point
from .expr.rational import DivisionByZeroError
from .families import FamilyError, FamilySpec, make_family
from .geometry import PotentialPair
from .report import SelectionError, parse_selection, run_checks

log = logging.getLogger("hhverify")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class InputError(ValueError):
    pass


def _common(p: argparse.ArgumentParser, checks: bool = True):
    p.add_argument("--file", help="JSON input with {theta0, theta1} or {family: {...}}")
    if checks:
        p.add_argument("--checks", default=None, help="comma list of checks, or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--human", action="store_true", help="render a table instead of JSON")


def _theta_args(p):
    p.add_argument("--theta0")
    p.add_argument("--theta1")


def _family_args(p):
    p.add_argument("--name", choices=("monomial", "elementary", "special-monomial", "sparling-tod",
                                      "eguchi-hanson", "flat"))
    for k in ("k", "l", "m", "n"):
        p.add_argument(f"--{k}", type=int)
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--F0")
    p.add_argument("--F1")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hhverify", description="Exact checks for hyper-Hermitian potentials.")
    ap.add_argument("--version", action="version", version=f"hhverify {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run checks on an explicit potential pair")
    _theta_args(c)
    _common(c)

    f = sub.add_parser("family", help="run checks on a named solution family")
    _family_args(f)
    _common(f)

    r = sub.add_parser("residue", help="potentials from monomial twistor functions by residues")
    for k in ("k", "l", "m", "n"):
        r.add_argument(f"--{k}", type=int)
    r.add_argument("--a", default="a")
    r.add_argument("--b", default="b")
    r.add_argument("--verify", action="store_true", help="compare with the elementary state")
    r.add_argument("--contour", action="store_true", help="also compare with the numeric contour integral")
    r.add_argument("--normalised", action="store_true", help="divide by binom(k+l, k)")
    r.add_argument("--samples", type=int, default=256)
    _common(r, checks=False)

    k = sub.add_parser("classify", help="Petrov type at random points")
    _theta_args(k)
    _family_args(k)
    _common(k, checks=False)
    return ap


# input ------------------------------------------------------------------

def _load_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("input file must hold a JSON object")
    return data


def _family_from(args, data: dict) -> FamilySpec | None:
    fam = dict(data.get("family") or {})
    name = getattr(args, "name", None)
    if name:
        fam["name"] = name
    for key in ("k", "l", "m", "n", "a", "b", "F0", "F1"):
        v = getattr(args, key, None)
        if v is not None:
            fam[key] = v
    if "name" not in fam:
        return None
    try:
        return FamilySpec(fam.pop("name"), **{k: fam.get(k) for k in ("k", "l", "m", "n", "a", "b", "F0", "F1")})
    except TypeError as exc:
        raise InputError(str(exc)) from exc


def _theta_from(args, data: dict) -> PotentialPair | None:
    t0 = getattr(args, "theta0", None) or data.get("theta0")
    t1 = getattr(args, "theta1", None) or data.get("theta1")
    if t0 is None and t1 is None:
        return None
    return PotentialPair.parse(t0 or "0", t1 or "0")


def _resolve(args) -> tuple[PotentialPair, FamilySpec | None]:
    data = _load_file(args.file)
    fam = _family_from(args, data) if args.command != "check" else None
    if fam is not None:
        return make_family(fam), fam
    theta = _theta_from(args, data)
    if theta is None:
        if args.command == "check" and data.get("family"):
            fam = _family_from(argparse.Namespace(), data)
            return make_family(fam), fam
        raise InputError("no potential given (use --theta0/--theta1, --name or --file)")
    return theta, None


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# commands ---------------------------------------------------------------

def _cmd_checks(args) -> int:
    theta, fam = _resolve(args)
    sel = parse_selection(args.checks)
    rep = run_checks(theta, sel, seed=args.seed, points=args.points, family=fam)
    _emit(rep.human() if args.human else rep.dumps(), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _cmd_residue(args) -> int:
    from .families import special_monomial
    from .twistor import TwistorComponent, contour_oracle, residue_theta

    data = _load_file(args.file)
    for key in ("k", "l", "m", "n", "a", "b"):
        if getattr(args, key) is None and key in data:
            setattr(args, key, data[key])
    if args.k is None or args.l is None:
        raise InputError("residue needs --k and --l")
    comps = [("theta0", TwistorComponent(args.a, args.k, args.l, args.normalised))]
    if args.m is not None or args.n is not None:
        if args.m is None or args.n is None:
            raise InputError("give both --m and --n")
        comps.append(("theta1", TwistorComponent(args.b, args.m, args.n, args.normalised)))
    out = {"tool": "hhverify", "version": __version__, "normalised": args.normalised, "components": []}
    ok = True
    rng = random.Random(args.seed)
    for label, comp in comps:
        th = residue_theta(comp)
        entry = {"name": label, "theta": str(th)}
        if args.verify:
            ref = special_monomial(comp.p, comp.q, 0, 0, comp.coeff, 0).theta0
            same = (th - ref).is_zero()
            entry["elementary_state"] = str(ref)
            entry["equals_elementary_state"] = same
            ok = ok and same
        if args.contour:
            names = sorted(set(th.support()) | {"w", "z", "x", "y"})
            worst = 0.0
            for _ in range(args.points):
                pt = random_point(rng, names, [th])
                ex = th.eval_numeric(pt)
                num = contour_oracle(comp, pt, args.samples)
                worst = max(worst, abs(num - ex) / max(abs(ex), 1e-300))
            entry["contour_max_rel_error"] = worst
            ok = ok and worst <= 1e-8
        out["components"].append(entry)
    out["passed"] = ok
    if args.human:
        lines = [f"{e['name']} = {e['theta']}" + ("" if "equals_elementary_state" not in e
                 else f"  (elementary state: {'yes' if e['equals_elementary_state'] else 'no'})")
                 for e in out["components"]]
        _emit("\n".join(lines), args.out)
    else:
        _emit(json.dumps(out, indent=2), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_classify(args) -> int:
    from .petrov import PetrovError, petrov_classify

    theta, fam = _resolve(args)
    if args.points < 3:
        raise InputError("classification needs at least 3 points")
    try:
        v = petrov_classify(theta, seed=args.seed, n_points=args.points)
    except PetrovError as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    body = {"tool": "hhverify", "version": __version__, "input": theta.to_json(), "seed": args.seed, **v.to_json()}
    if fam is not None:
        body["input"]["family"] = fam.to_json()
    if args.human:
        _emit(f"Petrov type {v.label} ({'consistent' if v.consistent else 'inconsistent'} over "
              f"{len(v.per_point)} points)", args.out)
    else:
        _emit(json.dumps(body, indent=2), args.out)
    return EXIT_OK if v.consistent else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    handlers = {"check": _cmd_checks, "family": _cmd_checks, "residue": _cmd_residue, "classify": _cmd_classify}
    try:
        return handlers[args.command](args)
    except (InputError, ParseError, UnknownIdentifierError, DivisionByZeroError, FamilyError,
            SelectionError, ValueError) as exc:
        sys.stderr.write(f"hhverify: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
