from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from slopewright import gallery as G
from slopewright.errors import InvalidMap, NotPiecewiseMonotone
from slopewright.intervalmap import PwAffineMap, catalan, lap_entropy_oracle, tent_map
from slopewright.numbers import QuadraticSurd

unit = st.fractions(min_value=0, max_value=1, max_denominator=500)


@given(unit)
def test_tent_formula(x):
    T = tent_map()
    assert T(x) == (2 * x if x <= Fraction(1, 2) else 2 - 2 * x)


def test_rejects_bad_maps():
    with pytest.raises(InvalidMap):
        PwAffineMap([(0, 0), (Fraction(1, 2), 1)])
    with pytest.raises(InvalidMap):
        PwAffineMap([(0, 0), (Fraction(1, 2), 0), (1, 1)])


def test_tent_laps_double():
    assert [c for _, c, _ in lap_entropy_oracle(tent_map(), 10)] == [2**n for n in range(1, 11)]


def test_lap_oracle_needs_finite_laps():
    with pytest.raises(NotPiecewiseMonotone):
        lap_entropy_oracle(G.example_g(), 3)


def test_constant_slopes():
    assert G.example_g().check_constant_slope() == 3
    assert tent_map().check_constant_slope() == 2
    assert G.example_f().check_constant_slope() is None


def test_catalan():
    assert [catalan(n) for n in range(7)] == [1, 1, 2, 5, 14, 42, 132]


def test_critical_points_of_tent():
    crit = tent_map().critical_points()
    # the endpoints 0 and 1 count as critical
    assert set(crit.points) == {0, Fraction(1, 2), 1} and not crit.families


@given(st.integers(min_value=0, max_value=40))
def test_g_is_continuous_along_its_tail(n):
    g = G.example_g()
    fam = g.tails[0]
    n = fam.n0 + n
    L = fam.lap_count(n)
    for k in range(L + 1):
        assert g(fam.sub_x(n, k, L)) == fam.sub_y(n, k, L)


@given(unit)
def test_maps_stay_in_unit_interval(x):
    for inst in G.gallery().values():
        assert 0 <= inst.map(x) <= 1


def test_surd_breakpoints_evaluate_exactly():
    s = QuadraticSurd(-1, 1, 2)  # sqrt2 - 1
    m = PwAffineMap([(0, 0), (s, 1), (1, 0)])
    assert m(s / 2) == Fraction(1, 2)
