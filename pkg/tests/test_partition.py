from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from slopewright import gallery as G
from slopewright.errors import InvalidPartition
from slopewright.intervalmap import tent_map
from slopewright.partition import ON_PARTITION, Finite, MarkovPartition, Tail, parse_interval_id

unit = st.fractions(min_value=0, max_value=1, max_denominator=1000)


def test_gallery_partitions_validate():
    for name, inst in G.gallery().items():
        rep = inst.partition.validate(inst.map)
        assert rep.ok, (name, [c.name for c in rep.failures()])


def test_non_invariant_partition_fails():
    P = MarkovPartition([0, Fraction(1, 3), Fraction(1, 2), 1])
    rep = P.validate(tent_map())
    assert not rep.ok
    assert "invariant" in {c.name for c in rep.failures()}


def test_partition_needs_endpoints():
    with pytest.raises(InvalidPartition):
        MarkovPartition([Fraction(1, 2), 1])


@pytest.mark.parametrize("iid", [Finite(0), Finite(3), Tail(0, 1, 0), Tail(1, 12, 3)])
def test_interval_id_round_trip(iid):
    assert parse_interval_id(str(iid)) == iid


@given(unit)
def test_locate_interval_contains_point(x):
    P = G.example_partition()
    loc = P.locate_interval(x)
    if loc is ON_PARTITION:
        assert x in P.skeleton or P.point_id(x) is not None
        return
    if loc is None:
        assert x in P.accumulation
        return
    a, b = P.interval_bounds(loc)
    assert a < x < b


def test_refinement_of_slack_partition():
    inst = G.get("example-5.2-g")
    assert inst.partition.kind == "slack"
    Q = inst.partition.refine_to_taut(inst.map)
    assert Q.kind == "taut" and len(Q.families) == 2
    assert Q.validate(inst.map).ok
    assert set(inst.partition.skeleton) <= set(Q.skeleton) | set(Q.accumulation)


def test_family_widths_are_geometric():
    P = G.example_partition()
    w = [P.width(Tail(0, n, 0)) for n in range(1, 6)]
    assert len({w[i + 1] / w[i] for i in range(4)}) == 1
