from __future__ import annotations

import json

import pytest

from slopewright import gallery as G
from slopewright import io
from slopewright.errors import SpecFormatError


@pytest.mark.parametrize("name", sorted(G.gallery()))
def test_map_and_partition_round_trip(name):
    inst = G.get(name)
    assert io.map_from_json(io.map_to_json(inst.map)) == inst.map
    assert io.partition_from_json(io.partition_to_json(inst.partition)) == inst.partition


def test_numbers_are_strings():
    doc = json.loads(io.serialize(G.example_g(), G.example_partition()))
    assert doc["map"]["breakpoints"][0] == ["0", "1"]
    tail = doc["map"]["tails"][0]
    assert (tail["anchor"], tail["coeff"], tail["ratio"]) == ("1/2", "1/2", "1/3")


def test_read_spec_from_file(tmp_path):
    inst = G.get("example-5.2-f")
    p = tmp_path / "f.json"
    p.write_text(io.serialize(inst.map, inst.partition, None, "f"))
    cmap, P, perturb, name = io.read_spec(p)
    assert cmap == inst.map and P == inst.partition and perturb is None and name == "f"


@pytest.mark.parametrize("text", ["[]", "{}", '{"map": {"breakpoints": [["0", "x"]]}}', "not json"])
def test_malformed_documents(text):
    with pytest.raises(SpecFormatError):
        io.parse(text)
