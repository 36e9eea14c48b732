from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slopewright import gallery as G
from slopewright.errors import EndpointMismatch, SpecFormatError
from slopewright.intervalmap import tent_map
from slopewright.partition import Finite
from slopewright.perturbation import (
    Accordion,
    GeometricAccordion,
    certify_finitely_generated,
    parse_perturbation,
    perturbation_to_json,
    random_accordion_spec,
    window_perturb,
    zero_patterns_agree,
)
from slopewright.symbolic import TransitionMatrix, zero_pattern_equal


def test_geometric_accordion_reproduces_g():
    f, P = G.example_f(), G.example_partition()
    g = window_perturb(f, P, {Finite(1): GeometricAccordion(Fraction(1, 3))})
    assert g == G.example_g()


def test_accordion_on_tent():
    g = window_perturb(tent_map(), G.tent_partition(), {Finite(0): Accordion(3)})
    assert g == G.tent_accordion()
    A = TransitionMatrix(g, G.tent_partition("slack"))
    assert A.entry(Finite(0), Finite(0)) == 3 and A.entry(Finite(0), Finite(1)) == 3


def test_certificate_for_g():
    cert = certify_finitely_generated(G.example_f(), G.example_partition(), G.example_g())
    assert cert.ok and len(cert.checks) == 9
    assert cert.summary().startswith("finitely generated: certified")


def test_window_specs_are_validated():
    with pytest.raises(EndpointMismatch):
        Accordion(2)
    with pytest.raises(EndpointMismatch):
        GeometricAccordion(Fraction(1, 3), laps=3)
    with pytest.raises(SpecFormatError):
        GeometricAccordion(Fraction(3, 2))
    with pytest.raises(SpecFormatError):
        parse_perturbation({"F0": {"kind": "spiral"}})


def test_perturbation_json_round_trip():
    spec = {Finite(0): Accordion(5), Finite(1): GeometricAccordion(Fraction(1, 4), phase="matching")}
    assert parse_perturbation(perturbation_to_json(spec)) == spec


def test_slack_partition_is_refused():
    inst = G.get("example-5.2-g")
    with pytest.raises(SpecFormatError):
        window_perturb(inst.map, inst.partition, {})


def test_constant_phase_cannot_move_an_interior_end():
    with pytest.raises(EndpointMismatch):
        window_perturb(tent_map(), G.tent_partition(), {Finite(0): GeometricAccordion(Fraction(1, 2), anchor="left")})


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["tent", "example-5.2-f"]))
def test_accordions_keep_zero_patterns(seed, name):
    inst = G.get(name)
    spec = random_accordion_spec(inst.partition, np.random.default_rng(seed))
    g = window_perturb(inst.map, inst.partition, spec)
    ok, witness = zero_patterns_agree(inst.map, g, inst.partition)
    assert ok, witness


def test_zero_pattern_does_not_fix_the_class():
    # same zero pattern, yet tent is recurrent at 2 and the transient tent is transient at 4
    P = G.transient_partition()
    A = TransitionMatrix(tent_map(), P)
    B = TransitionMatrix(G.transient_tent(), P)
    assert zero_pattern_equal(A, B)[0]
