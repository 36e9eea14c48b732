from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slopewright.algebra import berlekamp_massey, format_poly, minimal_polynomial
from slopewright.errors import InconsistencyAlarm
from slopewright.graphs import find_finite_rome, find_simple_path_to_infinity
from slopewright.numbers import QuadraticSurd
from slopewright.spectral import (
    RECURRENT,
    TRANSIENT,
    check_exclusion,
    detect_closed_form,
    excessive_chain,
    first_return_series,
    first_returns_on,
    perron_value,
    renewal_identity,
    rome_vertex,
    spectral_report,
)
from slopewright.symbolic import finite_matrix
from graphgen import random_structured


def test_berlekamp_massey_fibonacci():
    fib = [1, 1]
    for _ in range(20):
        fib.append(fib[-1] + fib[-2])
    C, L = berlekamp_massey(fib)
    assert L == 2
    assert [int(c) for c in C[:3]] == [1, -1, -1]


def test_minimal_polynomial_of_silver_mean():
    assert format_poly(minimal_polynomial(QuadraticSurd(1, 1, 2)), "x") == "x^2 - 2*x - 1"
    assert format_poly(minimal_polynomial(Fraction(3)), "x") == "x - 3"


def test_closed_form_of_f_series():
    cf = detect_closed_form([1] + [2] * 40)
    assert cf is not None
    # F(z) = z + 2z^2/(1-z); F(z) = 1 at z = sqrt2 - 1
    z = QuadraticSurd(-1, 1, 2)
    assert z + 2 * z * z / (1 - z) == 1


def _dense_perron(rows):
    return max(abs(np.linalg.eigvals(np.array(rows, dtype=float))))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.integers(0, 3), min_size=4, max_size=4), min_size=4, max_size=4))
def test_perron_of_finite_matrices_matches_eigvals(rows):
    for i in range(4):
        rows[i][(i + 1) % 4] = max(rows[i][(i + 1) % 4], 1)  # irreducible
    p = perron_value(finite_matrix(rows))
    assert p.value == pytest.approx(_dense_perron(rows), rel=1e-9)


def _brute_first_returns(T, r, N):
    """Count loops r -> ... -> r of each length avoiding r inside, by explicit enumeration."""
    out = [0] * N
    stack = [(r, 0, 1)]
    while stack:
        u, n, mult = stack.pop()
        for w, a in T.rows[u].items():
            if not a or n + 1 > N:
                continue
            if w == r:
                out[n] += mult * a
            else:
                stack.append((w, n + 1, mult * a))
    return out


@pytest.mark.parametrize("name", ["tent-accordion-3", "example-5.2-g", "transient-tent"])
def test_first_returns_two_routes(matrices, name):
    A = matrices[name]
    T = A.truncation(10)
    r = T.index[rome_vertex(find_finite_rome(A))]
    assert first_returns_on(T, r, 7) == _brute_first_returns(T, r, 7)


def test_renewal_identity_detects_wrong_counts(matrices):
    A = matrices["example-5.2-g"]
    s = first_return_series(A, None, 16, find_finite_rome(A))
    T = A.truncation(s.depth)
    r = T.index[s.vertex]
    assert all(renewal_identity(T, r, s.counts))
    bad = list(s.counts)
    bad[2] += 1
    assert not all(renewal_identity(T, r, bad))


def test_classes(matrices):
    want = {"tent": (2, RECURRENT), "example-5.2-g": (3, RECURRENT),
            "example-5.2-f": (QuadraticSurd(1, 1, 2), RECURRENT), "transient-tent": (4, TRANSIENT)}
    for name, (lam, kind) in want.items():
        A = matrices[name]
        sp = spectral_report(A, find_finite_rome(A))
        assert sp.lam_exact == lam and sp.classification.kind == kind, name
        assert sp.entropy == pytest.approx(math.log(float(lam)))


def test_exclusion_alarm_on_rome_with_path(matrices):
    A = matrices["example-5.2-g"]
    cert = find_finite_rome(A)
    path = find_simple_path_to_infinity(random_structured(1, kind="up"))
    cls = spectral_report(A, cert).classification
    check_exclusion(cert, cls, None, None)
    with pytest.raises(InconsistencyAlarm):
        check_exclusion(cert, cls, None, path)


def test_chain_rows_are_substochastic(matrices):
    A = matrices["transient-tent"]
    cert = find_finite_rome(A)
    chain = excessive_chain(A, cert, 4)
    for iid in A.ids(6):
        assert chain.row_sum(iid) <= 1 + 1e-12


def test_recurrent_chain_returns(matrices):
    A = matrices["example-5.2-g"]
    cert = find_finite_rome(A)
    stats = excessive_chain(A, cert, 3).sample_return(rome_vertex(cert), 2000, 500, seed=1)
    assert stats.fraction > 0.97
