"""Exact coefficients: rationals (``gmpy2.mpq``) and Gaussian rationals.

Real coefficients are always stored as plain ``mpq``.  A
:class:`GaussianRational` only appears when the imaginary part is nonzero;
every operation demotes back to ``mpq`` when the imaginary part cancels.
That keeps the common (real) path fast and gives a canonical representation,
so coefficient equality is structural.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

__all__ = ["GaussianRational", "Q", "coerce", "to_complex", "is_real", "real_imag", "fmt_coeff"]

Q = mpq
_MPQ = type(mpq(0))


class GaussianRational:
    """Exact element re + im*i of Q(i) with ``im != 0``.

    Use :func:`make` (or arithmetic) rather than the constructor when the
    imaginary part might vanish.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def make(re, im):
        im = mpq(im)
        if not im:
            return mpq(re)
        return GaussianRational(re, im)

    # arithmetic ---------------------------------------------------------
    def __add__(self, o):
        if isinstance(o, GaussianRational):
            return GaussianRational.make(self.re + o.re, self.im + o.im)
        return GaussianRational(self.re + o, self.im)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, GaussianRational):
            return GaussianRational.make(self.re - o.re, self.im - o.im)
        return GaussianRational(self.re - o, self.im)

    def __rsub__(self, o):
        return GaussianRational(o - self.re, -self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __mul__(self, o):
        if isinstance(o, GaussianRational):
            return GaussianRational.make(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        if not o:
            return mpq(0)
        return GaussianRational(self.re * o, self.im * o)

    __rmul__ = __mul__

    def norm(self):
        return self.re * self.re + self.im * self.im

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def inverse(self):
        n = self.norm()
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, o):
        if isinstance(o, GaussianRational):
            return self * o.inverse()
        if not o:
            raise ZeroDivisionError("division by zero coefficient")
        return GaussianRational(self.re / o, self.im / o)

    def __rtruediv__(self, o):
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        r = mpq(1)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    # comparisons ----------------------------------------------------------
    def __eq__(self, o):
        if isinstance(o, GaussianRational):
            return self.re == o.re and self.im == o.im
        return False

    def __ne__(self, o):
        return not self.__eq__(o)

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return True

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return fmt_coeff(self)


def coerce(value) -> object:
    """Convert ints, Fractions, mpq, floats (exactly) or complex to a coefficient."""
    if isinstance(value, (_MPQ, GaussianRational)):
        return value
    if isinstance(value, bool):
        return mpq(int(value))
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, (Fraction, Rational)):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        return mpq(Fraction(value))
    if isinstance(value, complex):
        return GaussianRational.make(Fraction(value.real), Fraction(value.imag))
    try:
        return mpq(value)
    except (TypeError, ValueError) as exc:
        raise TypeError(f"cannot use {value!r} as an exact coefficient") from exc


def is_real(c) -> bool:
    return not isinstance(c, GaussianRational)


def real_imag(c):
    if isinstance(c, GaussianRational):
        return c.re, c.im
    return c, mpq(0)


def to_complex(c) -> complex:
    if isinstance(c, GaussianRational):
        return complex(float(c.re), float(c.im))
    return complex(float(c))


def _fmt_q(q) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def fmt_coeff(c) -> str:
    """Grammar-compatible text for a coefficient (complex ones parenthesised)."""
    if isinstance(c, GaussianRational):
        re, im = c.re, c.im
        if im == 1:
            ims = "i"
        elif im == -1:
            ims = "-i"
        else:
            ims = f"{_fmt_q(im)}*i"
        if not re:
            return f"({ims})"
        sign = "-" if ims.startswith("-") else "+"
        return f"({_fmt_q(re)} {sign} {ims.lstrip('-')})"
    return _fmt_q(c)
