"""Model parameters."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt


@dataclass(frozen=True)
class RcParams:
    p: float
    q: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if self.q < 1.0:
            raise ValueError(f"q must be >= 1 for the monotone machinery, got {self.q}")

    @property
    def cut_open_prob(self) -> float:
        return cut_open_prob(self)

    @property
    def critical_point(self) -> float:
        return sqrt(self.q) / (sqrt(self.q) + 1.0)


def cut_open_prob(params: RcParams) -> float:
    """Heat-bath probability of opening an edge whose flip changes the component count."""
    p, q = params.p, params.q
    return p / (p + q * (1.0 - p))
