from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from graphgen import random_structured
from slopewright.graphs import ROME_NODE_CAP, connectivity_report, find_finite_rome, find_simple_path_to_infinity
from slopewright.symbolic import TransitionMatrix, finite_matrix

EXPECTED_ROMES = {
    "tent": ["F0", "F1"],
    "example-5.2-f": ["F0"],
    "example-5.2-g": ["F0"],
    "transient-tent": ["F0"],
}


def test_gallery_romes(matrices):
    for name, want in EXPECTED_ROMES.items():
        cert = find_finite_rome(matrices[name])
        assert cert is not None and cert.describe() == want, name


def test_gallery_is_mixing(matrices):
    for name, A in matrices.items():
        rep = connectivity_report(A)
        assert rep.all_pass, (name, rep.to_json())


def test_rank_decreases_off_the_rome(matrices):
    A = matrices["example-5.2-g"]
    cert = find_finite_rome(A)
    T = A.truncation(12)
    for i, u in enumerate(T.ids):
        if u in cert.rome:
            continue
        for j in T.successors(i):
            w = T.ids[j]
            if w not in cert.rome:
                assert cert.rank(w) < cert.rank(u), (u, w)


def test_finite_matrix_rome_is_a_feedback_set():
    A = finite_matrix([[0, 1, 0], [0, 0, 1], [1, 1, 0]])
    cert = find_finite_rome(A)
    assert cert is not None
    # every cycle of the graph meets the Rome
    rest = {0, 1, 2} - {v.k for v in cert.rome}
    edges = {(0, 1), (1, 2), (2, 0), (2, 1)}
    sub = {(a, b) for a, b in edges if a in rest and b in rest}
    assert not any((b, a) in sub or a == b for a, b in sub)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_rome_and_path_to_infinity_exclude_each_other(seed):
    A = random_structured(seed)
    cert = find_finite_rome(A)
    path = find_simple_path_to_infinity(A)
    assert (cert is None) != (path is None)


def test_path_to_infinity_on_upward_drift():
    A = random_structured(1, kind="up")
    path = find_simple_path_to_infinity(A)
    assert path is not None and find_finite_rome(A) is None
    assert path.to_json() == {"cycle": ["T0"], "drift": 1.0}


def test_rome_search_stays_small_on_catalan_cells(instances):
    # cells of the refined transient tent split into Catalan-many pieces; the
    # candidate set must stop deepening before it explodes
    inst = instances["transient-tent"]
    A = TransitionMatrix(inst.map, inst.partition.refine_to_taut(inst.map))
    cert = find_finite_rome(A)
    assert cert is not None and "F0" in cert.describe()
    sh = A.shapes[1]
    assert sum(sh.count(n) for n in range(sh.n0, cert.cut[1] + 1)) <= ROME_NODE_CAP
