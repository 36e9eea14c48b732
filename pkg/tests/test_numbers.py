from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from slopewright.numbers import QuadraticSurd, exact, format_exact, parse_exact, sign, sqrt_exact, to_float

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=60)
radicands = st.sampled_from([2, 3, 5, 6, 7])


def test_golden_units():
    s = QuadraticSurd(1, 1, 2)
    assert s * s.conjugate() == -1
    assert isinstance(s * s.conjugate(), Fraction)
    assert 1 / s == QuadraticSurd(-1, 1, 2)


def test_make_demotes_rational():
    assert QuadraticSurd.make(3, 0, 2) == Fraction(3)
    assert isinstance(QuadraticSurd.make(3, 0, 2), Fraction)


def test_squarefree_normalization():
    assert QuadraticSurd(0, 1, 8) == QuadraticSurd(0, 2, 2)
    with pytest.raises(ValueError):
        QuadraticSurd(0, 1, 9)


def test_sqrt_exact():
    assert sqrt_exact(Fraction(9, 4)) == Fraction(3, 2)
    assert sqrt_exact(Fraction(2)) == QuadraticSurd(0, 1, 2)


def test_exact_rejects_floats_and_bools():
    with pytest.raises(TypeError):
        exact(0.5)
    with pytest.raises(TypeError):
        exact(True)


@given(fractions, fractions, radicands)
def test_format_parse_round_trip(a, b, d):
    x = QuadraticSurd.make(a, b, d)
    assert parse_exact(format_exact(x)) == x


@given(fractions, fractions, fractions, fractions, radicands)
def test_field_operations_match_floats(a, b, c, e, d):
    x, y = QuadraticSurd.make(a, b, d), QuadraticSurd.make(c, e, d)
    assert to_float(x + y) == pytest.approx(to_float(x) + to_float(y), abs=1e-9)
    assert to_float(x * y) == pytest.approx(to_float(x) * to_float(y), rel=1e-9, abs=1e-9)
    if y != 0:
        assert (x / y) * y == x


@given(fractions, fractions, radicands)
def test_sign_is_exact(a, b, d):
    x = QuadraticSurd.make(a, b, d)
    f = float(a) + float(b) * math.sqrt(d)
    if abs(f) > 1e-9:
        assert sign(x) == (1 if f > 0 else -1)
    assert (x > 0) == (sign(x) > 0)
