"""Random structured transition matrices with one tail family, for property tests."""
from __future__ import annotations

import random

from slopewright.intervalmap import LapRule
from slopewright.partition import Coverage, FamRange, Finite, Tail
from slopewright.symbolic import (
    FamilyShape,
    RangeEnd,
    SyntheticMatrix,
    Template,
    TemplateLap,
    TemplateRange,
    row_from_coverage,
)

SHAPES = (FamilyShape(1, LapRule("const", 1, 0)),)
KINDS = ("down", "up", "both")


def _shift(d: int, mult: int) -> TemplateLap:
    end = RangeEnd(1, d, 0)
    return TemplateLap(mult, frozenset(), (TemplateRange(0, end, end),))


def _cell(m: int):
    return FamRange(0, (m, 0), (m, 0))


def random_structured(seed: int, kind: str | None = None) -> SyntheticMatrix:
    """A finite block of 1 to 4 vertices plus one tail family of single cells.

    down: finite rows reach every cell, cells step down to cell 1, which feeds back.
    up:   finite rows reach cell 1, cells step up and feed back at every level.
    both: finite rows reach cell 1, cells step down and up, cell 1 feeds back.
    """
    rng = random.Random(seed)
    kind = kind or rng.choice(KINDS)
    n = rng.randint(1, 4)
    rows = {}
    back = frozenset({rng.randrange(n)})
    entry = rng.randrange(n)
    for i in range(n):
        # the cycle 0 -> 1 -> ... -> n-1 -> 0 keeps the finite block irreducible
        fin = frozenset(j for j in range(n) if rng.random() < 0.5) | {(i + 1) % n}
        laps = [(1, Coverage(fin, ()))]
        if i == entry or rng.random() < 0.4:
            reach = FamRange(0, (1, 0), None) if kind == "down" else _cell(1)
            laps.append((rng.randint(1, 2), Coverage(frozenset(), (reach,))))
        rows[Finite(i)] = row_from_coverage(laps, SHAPES)
    a, b = rng.randint(1, 3), rng.randint(1, 3)
    if kind == "down":
        rows[Tail(0, 1, 0)] = row_from_coverage([(b, Coverage(back, ()))], SHAPES)
        laps = (_shift(-1, a),)
    elif kind == "up":
        rows[Tail(0, 1, 0)] = row_from_coverage([(b, Coverage(back, ())), (a, Coverage(frozenset(), (_cell(2),)))],
                                                SHAPES)
        laps = (_shift(+1, a), TemplateLap(b, back, ()))
    else:
        rows[Tail(0, 1, 0)] = row_from_coverage([(b, Coverage(back, ())), (a, Coverage(frozenset(), (_cell(2),)))],
                                                SHAPES)
        laps = (_shift(-1, b), _shift(+1, a))
    templates = {(0, 0): Template(0, 0, 2, laps)}
    return SyntheticMatrix(n, SHAPES, rows, templates)
