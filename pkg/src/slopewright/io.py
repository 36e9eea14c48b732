"""JSON documents for maps, partitions and perturbation specs.

Numbers are written as strings ("1/3", "1/2+1/2*sqrt(5)") so that
serialization is exact and byte-stable.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import SpecFormatError
from .intervalmap import Geo, LapRule, PwAffineMap, TailFamily
from .numbers import format_exact, parse_exact
from .partition import MarkovPartition, PointFamily


def _num(x) -> str:
    return format_exact(x)


def _parse_num(v, where: str):
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise SpecFormatError(f"{where}: expected a number string, got {v!r}")
    try:
        return parse_exact(str(v))
    except (ValueError, ZeroDivisionError) as e:
        raise SpecFormatError(f"{where}: cannot parse {v!r} ({e})") from None


def _geo_json(g: Geo) -> dict:
    return {"anchor": _num(g.anchor), "coeff": _num(g.coeff), "ratio": _num(g.ratio)}


def _geo_parse(obj, where) -> Geo:
    try:
        return Geo(_parse_num(obj["anchor"], where), _parse_num(obj["coeff"], where), _parse_num(obj["ratio"], where))
    except (KeyError, TypeError):
        raise SpecFormatError(f"{where}: geometric sequence needs anchor, coeff, ratio") from None


def map_to_json(cmap: PwAffineMap) -> dict:
    out = {"breakpoints": [[_num(x), _num(y)] for x, y in cmap.breakpoints]}
    if cmap.tails:
        tails = []
        for t in cmap.tails:
            d = {
                "anchor": _num(t.anchor),
                "coeff": _num(t.coeff),
                "ratio": _num(t.ratio),
                "n0": t.n0,
                "yA": _geo_json(t.yA),
                "yB": _geo_json(t.yB),
            }
            if t.laps is not None:
                d["laps"] = t.laps.to_json()
            tails.append(d)
        out["tails"] = tails
    if cmap.joins:
        out["joins"] = [[_num(x), _num(y)] for x, y in cmap.joins]
    return out


def map_from_json(obj) -> PwAffineMap:
    if not isinstance(obj, dict) or "breakpoints" not in obj:
        raise SpecFormatError("map: an object with 'breakpoints' is required")
    bps = [(_parse_num(x, "breakpoint"), _parse_num(y, "breakpoint")) for x, y in obj["breakpoints"]]
    tails = []
    for i, t in enumerate(obj.get("tails", [])):
        where = f"tails[{i}]"
        try:
            laps = LapRule.from_json(t["laps"]) if "laps" in t else None
            tails.append(TailFamily(
                _parse_num(t["anchor"], where), _parse_num(t["coeff"], where), _parse_num(t["ratio"], where),
                int(t["n0"]), _geo_parse(t["yA"], where + ".yA"), _geo_parse(t["yB"], where + ".yB"), laps,
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise SpecFormatError(f"{where}: {e}") from None
    joins = [(_parse_num(x, "join"), _parse_num(y, "join")) for x, y in obj.get("joins", [])]
    return PwAffineMap(bps, tails, joins)


def partition_to_json(P: MarkovPartition) -> dict:
    out = {"kind": P.kind, "points": [_num(p) for p in P.points]}
    if P.families:
        fams = []
        for f in P.families:
            d = {"anchor": _num(f.anchor), "coeff": _num(f.coeff), "ratio": _num(f.ratio), "n0": f.n0}
            if f.subdivisions is not None:
                d["subdivisions"] = f.subdivisions.to_json()
            fams.append(d)
        out["families"] = fams
    if P.accumulation:
        out["accumulation"] = [_num(a) for a in P.accumulation]
    return out


def partition_from_json(obj) -> MarkovPartition:
    if not isinstance(obj, dict) or "points" not in obj:
        raise SpecFormatError("partition: an object with 'points' is required")
    fams = []
    for i, f in enumerate(obj.get("families", [])):
        where = f"families[{i}]"
        try:
            subs = LapRule.from_json(f["subdivisions"]) if "subdivisions" in f else None
            fams.append(PointFamily(_parse_num(f["anchor"], where), _parse_num(f["coeff"], where),
                                    _parse_num(f["ratio"], where), int(f["n0"]), subs))
        except (KeyError, TypeError, ValueError) as e:
            raise SpecFormatError(f"{where}: {e}") from None
    return MarkovPartition(
        [_parse_num(p, "point") for p in obj["points"]],
        fams,
        [_parse_num(a, "accumulation") for a in obj.get("accumulation", [])],
        obj.get("kind", "taut"),
    )


def document(cmap: PwAffineMap, P: MarkovPartition | None = None, perturb: dict | None = None,
             name: str | None = None) -> dict:
    doc = {}
    if name is not None:
        doc["name"] = name
    doc["map"] = map_to_json(cmap)
    if P is not None:
        doc["partition"] = partition_to_json(P)
    if perturb:
        doc["perturb"] = perturb
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFormatError(f"invalid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise SpecFormatError("a map document must be a JSON object")
    return doc


def parse_document(doc: dict):
    """(map, partition or None, perturb or None, name or None)."""
    if "map" not in doc:
        raise SpecFormatError("spec document has no 'map'")
    cmap = map_from_json(doc["map"])
    P = partition_from_json(doc["partition"]) if "partition" in doc else None
    return cmap, P, doc.get("perturb"), doc.get("name")


def serialize(cmap: PwAffineMap, P: MarkovPartition | None = None, perturb: dict | None = None,
              name: str | None = None) -> str:
    return dumps(document(cmap, P, perturb, name))


def parse(text: str):
    return parse_document(loads(text))


def read_spec(path: str | Path):
    return parse(Path(path).read_text())
