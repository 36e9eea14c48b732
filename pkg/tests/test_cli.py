from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

import slopewright.cli as cli
from slopewright import io


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args, env=None):
        return runner.invoke(cli.main, list(args), env=env)

    return invoke


def test_gallery_listing(run):
    res = run("gallery")
    assert res.exit_code == 0
    assert [line.split()[0] for line in res.output.splitlines()] == [
        "tent", "example-5.2-f", "example-5.2-g", "tent-accordion-3", "transient-tent"]


def test_gallery_instance_is_a_spec(run):
    res = run("gallery", "example-5.2-g")
    cmap, P, _, name = io.parse(res.output)
    assert name == "example-5.2-g" and cmap.check_constant_slope() == 3


def test_unknown_gallery_entry(run):
    assert run("gallery", "nope").exit_code == 1
    assert run("validate", "gallery:nope").exit_code == 1


def test_validate(run, tmp_path):
    res = run("validate", "gallery:tent")
    assert res.exit_code == 0 and "result: pass" in res.output
    bad = tmp_path / "bad.json"
    bad.write_text('{"map": {"breakpoints": [["0","0"],["1/2","1"],["1","0"]]}, '
                   '"partition": {"kind": "taut", "points": ["0","1/3","1/2","1"]}}')
    res = run("validate", str(bad))
    assert res.exit_code == 1 and "[FAIL]" in res.output


def test_missing_file_is_exit_1(run):
    res = run("analyze", "/no/such/file.json")
    assert res.exit_code == 1 and "no such input file" in res.output


def test_matrix_and_csv(run, tmp_path):
    out = tmp_path / "m.csv"
    res = run("matrix", "gallery:example-5.2-g", "--depth", "3", "--csv", str(out))
    assert res.exit_code == 0
    assert "F1 -> F0:2 T0.1:4 T0.2:6 T0.3:8" in res.output
    assert out.read_text().startswith("row,F0,T0.1")


def test_graph_dot(run, tmp_path):
    out = tmp_path / "g.dot"
    assert run("graph", "gallery:example-5.2-g", "--dot", str(out)).exit_code == 0
    assert 'fillcolor="#f4c542"' in out.read_text()


def test_rome_and_inconclusive_exit(run, monkeypatch):
    res = run("rome", "gallery:example-5.2-f")
    assert res.exit_code == 0 and "rome: F0" in res.output
    monkeypatch.setattr(cli, "find_finite_rome", lambda *a, **k: None)
    assert run("rome", "gallery:tent").exit_code == 2


def test_classify_transient(run):
    res = run("classify", "gallery:transient-tent")
    assert res.exit_code == 0
    assert "class = transient" in res.output and "F(1/lambda) = 2/3" in res.output


def test_analyze_json_is_deterministic(run):
    a = run("analyze", "gallery:example-5.2-f", "--format", "json")
    b = run("analyze", "gallery:example-5.2-f", "--format", "json")
    assert a.exit_code == 0 and a.output == b.output
    doc = json.loads(a.output)
    assert doc["config"]["depth"] == 16
    assert doc["analysis"]["spectral"]["minimal_polynomial"] == "x^2 - 2*x - 1"


def test_env_overrides(run):
    res = run("rome", "gallery:tent", "--format", "json", env={"SLOPEWRIGHT_DEPTH": "8", "SLOPEWRIGHT_SEED": "7"})
    cfg = json.loads(res.output)["config"]
    assert (cfg["depth"], cfg["seed"]) == (8, 7)
    assert run("rome", "gallery:tent", env={"SLOPEWRIGHT_DEPTH": "0"}).exit_code == 1


def test_analyze_writes_model_and_svg(run, tmp_path):
    model, svg = tmp_path / "m.json", tmp_path / "a.svg"
    res = run("analyze", "gallery:example-5.2-g", "--model", str(model), "--svg", str(svg))
    assert res.exit_code == 0
    cmap, P, _, _ = io.read_spec(model)
    assert cmap.check_constant_slope() == 3
    assert svg.read_text().startswith("<svg") and "constant slope model" in svg.read_text()


def test_perturb_round_trip(run, tmp_path):
    out = tmp_path / "g.json"
    res = run("perturb", "gallery:example-5.2-f", "-o", str(out))
    assert res.exit_code == 0 and "certified" in res.output
    res = run("analyze", str(out))
    assert res.exit_code == 0 and "lambda = 3" in res.output


def test_perturb_inline_spec_to_stdout(run):
    res = run("perturb", "gallery:tent", "--with", '{"F0": {"kind": "accordion", "m": 3}}')
    assert res.exit_code == 0
    cmap, _, _, _ = io.parse(res.stdout)
    assert len(cmap.breakpoints) == 5


def test_itinerary_and_realize(run):
    res = run("itinerary", "gallery:tent", "--point", "1/7", "--steps", "3")
    assert res.output.splitlines()[-1] == "F0 -> F0 -> F1 -> F1"
    res = run("realize", "gallery:tent", "--path", "F0,F1,F0")
    assert res.output.splitlines()[-1] == "point = 7/16"
    assert run("realize", "gallery:example-5.2-g", "--path", "T0.3,F1").exit_code == 1


def test_chain(run):
    res = run("chain", "gallery:example-5.2-g", "--trials", "200", "--steps", "500", "--format", "json")
    doc = json.loads(res.output)
    assert res.exit_code == 0 and doc["lambda"] == "3"
    assert doc["stats"]["returned"] >= 190
