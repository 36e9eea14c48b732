from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slopewright.config import RunConfig
from slopewright.numbers import QuadraticSurd, to_float
from slopewright.slopemodel import NO_MODEL_TRANSIENT, analyze, analyze_model

CFG = RunConfig(grid=200)


@pytest.fixture(scope="module")
def f_report(instances):
    inst = instances["example-5.2-f"]
    return analyze(inst.map, inst.partition, CFG, inst.name)


def test_f_model_has_constant_slope(f_report):
    m = f_report.model
    assert m.lam == QuadraticSurd(1, 1, 2)
    assert m.model.check_constant_slope() == m.lam
    assert m.exact and m.residual == 0


def test_psi_fixes_ends_and_is_monotone(f_report):
    psi = f_report.model.psi
    assert psi(Fraction(0)) == 0 and psi(Fraction(1)) == 1
    xs = [Fraction(i, 97) for i in range(98)]
    ys = [to_float(psi(x)) for x in xs]
    assert all(a < b for a, b in zip(ys, ys[1:]))


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=0, max_value=1, max_denominator=90))
def test_conjugacy_equation(f_report, instances, x):
    f = instances["example-5.2-f"].map
    m = f_report.model
    lhs, rhs = m.psi(f(x)), m.model(m.psi(x))
    assert to_float(lhs) == pytest.approx(to_float(rhs), abs=1e-12)


def test_model_reanalysis_keeps_lambda(f_report):
    again = analyze_model(f_report)
    assert again.lam == f_report.lam and again.kind == "recurrent"


def test_model_partition_is_markov(f_report):
    m = f_report.model
    assert m.conjugacy.image_partition().validate(m.model).ok


def test_accordion_model(instances):
    inst = instances["tent-accordion-3"]
    rep = analyze(inst.map, inst.partition, CFG, inst.name)
    assert rep.lam == 4 and rep.model.model.check_constant_slope() == 4


def test_transient_report(instances):
    inst = instances["transient-tent"]
    rep = analyze(inst.map, inst.partition, CFG, inst.name)
    assert rep.model is None and rep.absent_reason == NO_MODEL_TRANSIENT
    js = rep.to_json()
    assert js["config"]["grid"] == 200


def test_text_report_embeds_config(instances):
    inst = instances["tent"]
    text = analyze(inst.map, inst.partition, CFG, inst.name).to_text()
    assert text.startswith("# config:") and "lambda = 2" in text


def test_class_is_rechecked_on_the_taut_refinement(instances):
    inst = instances["example-5.2-g"]
    rep = analyze(inst.map, inst.partition, CFG, inst.name)
    assert "class on the taut refinement agrees: recurrent at lambda = 3" in rep.notes
    inst = instances["transient-tent"]
    rep = analyze(inst.map, inst.partition, CFG, inst.name)
    assert any(n.startswith("class on the taut refinement not checked") for n in rep.notes)
