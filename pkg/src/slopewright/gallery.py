"""Named example instances (map, partition, optional perturbation)."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Fr

from .intervalmap import Geo, LapRule, PwAffineMap, TailFamily, tent_map
from .partition import MarkovPartition, PointFamily


@dataclass(frozen=True)
class Instance:
    name: str
    map: PwAffineMap
    partition: MarkovPartition
    description: str
    perturb: dict | None = field(default=None)


def example_f() -> PwAffineMap:
    return PwAffineMap([(0, 1), (Fr(1, 3), 0), (Fr(1, 2), Fr(1, 2)), (1, 0)])


def example_partition(kind: str = "taut") -> MarkovPartition:
    """{0, 1/3, 1/2, 1} together with p_n = (1 - 3**-n)/2, n >= 1."""
    fam = PointFamily(Fr(1, 2), Fr(-1, 2), Fr(1, 3), 1)
    return MarkovPartition([0, Fr(1, 3), Fr(1, 2), 1], [fam], [Fr(1, 2)], kind)


def example_g() -> PwAffineMap:
    tail = TailFamily(
        Fr(1, 2), Fr(1, 2), Fr(1, 3), 0,
        yA=Geo(Fr(1, 2), 0, Fr(1, 3)),
        yB=Geo(Fr(1, 2), Fr(-1, 2), Fr(1, 3)),
    )
    return PwAffineMap([(0, 1), (Fr(1, 3), 0), (Fr(1, 2), Fr(1, 2))], [tail], [(Fr(1, 2), Fr(1, 2))])


def tent_partition(kind: str = "taut") -> MarkovPartition:
    return MarkovPartition([0, Fr(1, 2), 1], kind=kind)


def tent_accordion() -> PwAffineMap:
    """The tent with its left lap replaced by three laps."""
    return PwAffineMap([(0, 0), (Fr(1, 6), 1), (Fr(1, 3), 0), (Fr(1, 2), 1), (1, 0)])


def transient_tent() -> PwAffineMap:
    """Tent-like map whose right half carries cells (1 - 2**-n, 1 - 2**-(n+1))
    with 2*Catalan(n-1) laps zigzagging between 0 and 2**-n."""
    tail = TailFamily(
        1, Fr(-1, 2), Fr(1, 2), 1,
        yA=Geo(0, 0, Fr(1, 2)),
        yB=Geo(0, 1, Fr(1, 2)),
        laps=LapRule("catalan", 2, -1),
    )
    return PwAffineMap([(0, 0), (Fr(1, 2), 1)], [tail], [(1, 0)])


def transient_partition() -> MarkovPartition:
    """{0, 1/2, 1} together with 2**-n, n >= 1 (slack for the transient tent)."""
    fam = PointFamily(0, 1, Fr(1, 2), 1)
    return MarkovPartition([0, Fr(1, 2), 1], [fam], [0], "slack")


def _instances() -> dict:
    f, P = example_f(), example_partition("taut")
    return {
        "tent": Instance("tent", tent_map(), tent_partition(), "full tent map, slope 2"),
        "example-5.2-f": Instance(
            "example-5.2-f", f, P,
            "three-lap map with a taut countable partition accumulating at 1/2",
            perturb={"F1": {"kind": "geometric", "ratio": "1/3"}},
        ),
        "example-5.2-g": Instance(
            "example-5.2-g", example_g(), example_partition("slack"),
            "geometric accordion of example-5.2-f on (1/2, 1); constant slope 3",
        ),
        "tent-accordion-3": Instance(
            "tent-accordion-3", tent_accordion(), tent_partition("slack"),
            "tent with the left lap folded into three laps (recurrent, entropy log 4)",
        ),
        "transient-tent": Instance(
            "transient-tent", transient_tent(), transient_partition(),
            "tent variant with Catalan lap growth; transient at entropy log 4",
        ),
    }


def gallery() -> dict:
    return _instances()


def get(name: str) -> Instance:
    inst = _instances()
    if name not in inst:
        raise KeyError(f"unknown gallery instance {name!r}; known: {', '.join(sorted(inst))}")
    return inst[name]
