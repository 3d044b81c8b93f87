"""Recursive-descent parser for the expression wire format.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := ('+'|'-')* factor
    factor := base ('^' signed-integer | '^(' signed-integer ')')?
    base   := integer | 'i' | identifier | '(' expr ')'

A rational literal ``p/q`` is read as the division of two integers, which
gives the same value.  Leading unary signs are accepted as a convenience
(``-x`` instead of ``0-x``); ``-x^2`` means ``-(x^2)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import poly as P
from .rational import ONE, DivisionByZeroError, RationalExpr, const, var, I_UNIT

__all__ = ["parse_expr", "ParseError", "UnknownIdentifierError"]


class ParseError(ValueError):
    """Syntax error; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class UnknownIdentifierError(ParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # 'int' | 'name' | 'op' | 'end'
    value: str
    pos: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def tokenize(text: str) -> list[Token]:
    out = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", i, text)
        if m.group(1) is not None:
            out.append(Token("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(Token("name", m.group(2), m.start(2)))
        else:
            op = m.group(3)
            out.append(Token("op", "^" if op == "**" else op, m.start(3)))
        i = m.end()
    out.append(Token("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, params):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.params = params

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, op: str) -> bool:
        t = self.peek()
        if t.kind == "op" and t.value == op:
            self.i += 1
            return True
        return False

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.pos, self.text)

    def parse(self) -> RationalExpr:
        if self.peek().kind == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.peek().kind != "end":
            self.fail(f"unexpected token {self.peek().value!r}")
        return e

    def expr(self) -> RationalExpr:
        acc = self.term()
        while True:
            if self.accept("+"):
                acc = acc + self.term()
            elif self.accept("-"):
                acc = acc - self.term()
            else:
                return acc

    def term(self) -> RationalExpr:
        acc = self.unary()
        while True:
            if self.accept("*"):
                acc = acc * self.unary()
            elif self.peek().kind == "op" and self.peek().value == "/":
                tok = self.take()
                rhs = self.unary()
                if rhs.is_zero():
                    raise DivisionByZeroError(f"division by zero at position {tok.pos}")
                acc = acc / rhs
            else:
                return acc

    def unary(self) -> RationalExpr:
        neg = False
        while True:
            if self.accept("-"):
                neg = not neg
            elif self.accept("+"):
                pass
            else:
                break
        f = self.factor()
        return -f if neg else f

    def factor(self) -> RationalExpr:
        b = self.base()
        if self.accept("^"):
            paren = self.accept("(")
            sign = 1
            while True:
                if self.accept("-"):
                    sign = -sign
                elif self.accept("+"):
                    pass
                else:
                    break
            t = self.take()
            if t.kind != "int":
                self.fail("exponent must be an integer", t)
            n = sign * int(t.value)
            if paren and not self.accept(")"):
                self.fail("expected ')'")
            if n < 0 and b.is_zero():
                raise DivisionByZeroError(f"negative power of zero at position {t.pos}")
            if n == 0:
                return ONE
            return b ** n
        return b

    def base(self) -> RationalExpr:
        t = self.take()
        if t.kind == "int":
            return const(int(t.value))
        if t.kind == "name":
            if t.value == "i":
                return I_UNIT
            if t.value in P.COORDS or (t.value in self.params):
                return var(t.value)
            raise UnknownIdentifierError(f"unknown identifier {t.value!r}", t.pos, self.text)
        if t.kind == "op" and t.value == "(":
            e = self.expr()
            if not self.accept(")"):
                self.fail("expected ')'")
            return e
        if t.kind == "end":
            self.fail("unexpected end of input", t)
        self.fail(f"unexpected token {t.value!r}", t)


def parse_expr(text: str, params=None) -> RationalExpr:
    """Parse ``text`` into a canonical :class:`RationalExpr`.

    ``params`` lists the admissible parameter names; by default every
    declared generator except internal ones (leading underscore) is allowed.
    Names passed explicitly are declared on the fly.
    """
    if params is None:
        allowed = {n for n in P.generators() if not n.startswith("_")} - set(P.COORDS)
    else:
        allowed = set()
        for n in params:
            P.declare(n)
            allowed.add(n)
    return _Parser(text, allowed).parse()
