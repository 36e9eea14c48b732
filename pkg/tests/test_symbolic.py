from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slopewright import gallery as G
from slopewright.errors import BrokenPath, IndexMismatch
from slopewright.partition import Finite, Tail
from slopewright.symbolic import TransitionMatrix, itinerary, realize_path, to_csv, to_dot, zero_pattern_equal


@pytest.fixture(scope="module")
def g_matrix():
    inst = G.get("example-5.2-g")
    return inst, TransitionMatrix(inst.map, inst.partition)


def test_rows_of_g(g_matrix):
    _, A = g_matrix
    for n in range(1, 12):
        assert A.entry(Finite(0), Tail(0, n, 0)) == 1
        assert A.entry(Finite(1), Tail(0, n, 0)) == 2 * n + 2
        assert A.entry(Tail(0, n + 1, 0), Tail(0, n, 0)) == 1
    assert A.entry(Tail(0, 1, 0), Finite(0)) == 1
    assert A.entry(Finite(1), Finite(0)) == 2


def test_structured_rows_match_preimage_count(g_matrix):
    _, A = g_matrix
    ids = A.ids(5)
    for I in ids:
        for J in ids:
            assert A.entry(I, J) == A.entry_by_preimages(I, J), (I, J)


def _random_path(A, depth, length, rng):
    T = A.truncation(depth)
    i = rng.randrange(T.size)
    path = [T.ids[i]]
    for _ in range(length):
        succ = sorted(T.successors(i))
        i = rng.choice(succ)
        path.append(T.ids[i])
    return path


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["tent", "example-5.2-g", "example-5.2-f"]))
def test_realized_point_follows_path(seed, name):
    inst = G.get(name)
    A = TransitionMatrix(inst.map, inst.partition)
    path = _random_path(A, 4, 6, random.Random(seed))
    y = realize_path(inst.map, inst.partition, path, A)
    assert itinerary(inst.map, inst.partition, y, len(path) - 1) == path


def test_broken_path(g_matrix):
    inst, A = g_matrix
    with pytest.raises(BrokenPath):
        realize_path(inst.map, inst.partition, [Tail(0, 3, 0), Finite(1)], A)


def test_exports(g_matrix):
    _, A = g_matrix
    T = A.truncation(2)
    dot = to_dot(T, [Finite(0)])
    assert dot.startswith("digraph") and '"F0" [shape=box style=filled' in dot
    csv = to_csv(T).splitlines()
    assert csv[0] == "row," + ",".join(str(i) for i in T.ids)
    assert len(csv) == T.size + 1


def test_zero_pattern_self_and_index_mismatch(g_matrix):
    inst, A = g_matrix
    assert zero_pattern_equal(A, A)[0]
    tent = G.get("tent")
    with pytest.raises(IndexMismatch):
        zero_pattern_equal(A, TransitionMatrix(tent.map, tent.partition))


def test_template_describes_shift(g_matrix):
    _, A = g_matrix
    (t,) = A.templates().values()
    assert t.describe() == "T0.n.0 (n>=2): 1x{T0[n-1..n-1]}"
