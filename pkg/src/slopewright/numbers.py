"""Exact scalars: rationals (``fractions.Fraction``) and real quadratic surds.

Every coordinate of a map, partition point or eigenvector entry is either a
``Fraction`` or a ``QuadraticSurd`` a + b*sqrt(d).  Surds are needed because
Perron values of small transition structures are frequently quadratic
irrationals (for instance 1 + sqrt(2)) and the constant slope model built from
them has to stay exact.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

Exact = Union[Fraction, "QuadraticSurd"]

_SURD_RE = re.compile(
    r"^\s*(?P<a>[+-]?\d+(?:/\d+)?)\s*(?P<sign>[+-])\s*(?P<b>\d+(?:/\d+)?)\s*\*\s*sqrt\(\s*(?P<d>\d+)\s*\)\s*$"
)


def _squarefree_part(d: int) -> tuple[int, int]:
    """Return (s, k) with d = k*k*s and s squarefree."""
    k = 1
    s = d
    p = 2
    while p * p <= s:
        while s % (p * p) == 0:
            s //= p * p
            k *= p
        p += 1
    return s, k


class QuadraticSurd:
    """The real number a + b*sqrt(d) with rational a, b and squarefree d > 1.

    Arithmetic with a ``Fraction`` or ``int`` is supported; results with a
    vanishing irrational part are demoted to ``Fraction``.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        a = Fraction(a)
        b = Fraction(b)
        d = int(d)
        if d < 2:
            raise ValueError("radicand must be at least 2")
        s, k = _squarefree_part(d)
        if s == 1:
            raise ValueError(f"{d} is a perfect square")
        self.a = a
        self.b = b * k
        self.d = s

    @staticmethod
    def make(a, b, d: int) -> Exact:
        if b == 0:
            return Fraction(a)
        return QuadraticSurd(a, b, d)

    # -- coercion -------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, QuadraticSurd):
            if other.d != self.d:
                raise ValueError("surds with different radicands do not mix")
            return other.a, other.b
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QuadraticSurd.make(self.a + o[0], self.b + o[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QuadraticSurd.make(self.a - o[0], self.b - o[1], self.d)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QuadraticSurd.make(o[0] - self.a, o[1] - self.b, self.d)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        a, b = o
        return QuadraticSurd.make(self.a * a + self.b * b * self.d, self.a * b + self.b * a, self.d)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.a, -self.b, self.d)

    def _inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero surd")
        return QuadraticSurd.make(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadraticSurd):
            return self * other._inverse()
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return QuadraticSurd.make(self.a / other, self.b / other, self.d)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._inverse() * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self._inverse() ** (-n)
        result: Exact = Fraction(1)
        base: Exact = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparison ------------------------------------------------------
    def sign(self) -> int:
        return surd_sign(self.a, self.b, self.d)

    def _cmp(self, other) -> int | None:
        o = self._lift(other)
        if o is None:
            return None
        return surd_sign(self.a - o[0], self.b - o[1], self.d)

    def __eq__(self, other):
        c = self._cmp(other)
        if c is None:
            if isinstance(other, float):
                return False
            return NotImplemented
        return c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self):
        return hash(("surd", self.a, self.b, self.d))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return True

    def __float__(self):
        return surd_to_float(self.a, self.b, self.d)

    def __repr__(self):
        return f"QuadraticSurd({format_exact(self)!r})"

    def __str__(self):
        return format_exact(self)


def surd_sign(a: Fraction, b: Fraction, d: int) -> int:
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: compare a^2 with b^2 d
    lhs = a * a
    rhs = b * b * d
    if lhs == rhs:
        return 0
    return sa if lhs > rhs else sb


def surd_to_float(a: Fraction, b: Fraction, d: int) -> float:
    if (a >= 0) == (b >= 0) or a == 0 or b == 0:
        return float(a) + float(b) * math.sqrt(d)
    # cancellation: use value = norm / conjugate
    n = a * a - b * b * d
    conj = float(a) - float(b) * math.sqrt(d)
    return float(n) / conj


def exact(x) -> Exact:
    """Coerce ints, strings and exact numbers to an exact scalar."""
    if isinstance(x, (Fraction, QuadraticSurd)):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_exact(x)
    raise TypeError(f"cannot make {x!r} exact")


def parse_exact(text: str) -> Exact:
    m = _SURD_RE.match(text)
    if m:
        b = Fraction(m.group("b"))
        if m.group("sign") == "-":
            b = -b
        return QuadraticSurd.make(Fraction(m.group("a")), b, int(m.group("d")))
    return Fraction(text.strip())


def format_exact(x: Exact) -> str:
    if isinstance(x, QuadraticSurd):
        sign = "+" if x.b >= 0 else "-"
        return f"{_frac_str(x.a)}{sign}{_frac_str(abs(x.b))}*sqrt({x.d})"
    return _frac_str(Fraction(x))


def _frac_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


def sign(x) -> int:
    if isinstance(x, QuadraticSurd):
        return x.sign()
    return (x > 0) - (x < 0)


def to_float(x) -> float:
    return float(x)


def log_abs(x) -> float:
    """Natural log of |x| for a nonzero exact scalar, robust to huge or tiny values."""
    if isinstance(x, QuadraticSurd):
        a = abs(x)
        if (a.a >= 0) == (a.b >= 0):
            return math.log(float(a))
        # a = norm / conjugate, conjugate has no cancellation
        n = abs(a.norm())
        return _log_frac(n) - math.log(abs(float(a.conjugate())))
    q = Fraction(x)
    if q == 0:
        raise ValueError("log of zero")
    return _log_frac(abs(q))


def _log_frac(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def floor_exact(x) -> int:
    """Exact floor of a rational or surd."""
    if isinstance(x, QuadraticSurd):
        guess = math.floor(float(x))
        while x < guess:
            guess -= 1
        while x >= guess + 1:
            guess += 1
        return guess
    return math.floor(Fraction(x))


def isqrt_fraction(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sqrt_exact(q: Fraction) -> Exact:
    """sqrt of a nonnegative rational as a Fraction or QuadraticSurd."""
    r = isqrt_fraction(q)
    if r is not None:
        return r
    # sqrt(n/d) = sqrt(n*d)/d
    n, d = q.numerator, q.denominator
    return QuadraticSurd(0, Fraction(1, d), n * d)


def mid(a, b):
    return (a + b) / 2
