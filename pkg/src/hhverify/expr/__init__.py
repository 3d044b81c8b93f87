"""Exact rational-function kernel."""
from __future__ import annotations

from .coeffs import GaussianRational, coerce
from .numeric import NumericPoint, random_point
from .parse import ParseError, UnknownIdentifierError, parse_expr
from .poly import COORDS, MultiPoly, declare
from .rational import ONE, ZERO, DivisionByZeroError, PoleError, RationalExpr, const, var

__all__ = [
    "COORDS",
    "DivisionByZeroError",
    "GaussianRational",
    "MultiPoly",
    "NumericPoint",
    "ONE",
    "ParseError",
    "PoleError",
    "RationalExpr",
    "UnknownIdentifierError",
    "ZERO",
    "coerce",
    "const",
    "declare",
    "diff",
    "eval_numeric",
    "is_zero",
    "parse_expr",
    "random_point",
    "var",
]


def diff(e: RationalExpr, v: str) -> RationalExpr:
    return e.diff(v)


def is_zero(e: RationalExpr) -> bool:
    return e.is_zero()


def eval_numeric(e: RationalExpr, p) -> complex:
    return e.eval_numeric(p)
