from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class RunConfig:
    depth: int = 16
    horizon: int = 64
    tol: float = 1e-9
    max_depth: int = 1024
    seed: int = 0
    series_length: int = 32
    grid: int = 1000
    output: str = "text"

    def __post_init__(self):
        if self.depth < 1 or self.depth > self.max_depth:
            raise ValueError("need 1 <= depth <= max_depth")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.output not in ("text", "json"):
            raise ValueError("output must be text or json")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def to_json(self) -> dict:
        return asdict(self)
