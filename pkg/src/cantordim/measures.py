"""Bernoulli (product) digit measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

SUM_TOL = 1e-12


@dataclass(frozen=True)
class ProductMeasure:
    """i.i.d. digit distribution ``(p_0, ..., p_{b-1})``; uniform is Lebesgue."""

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if len(probs) < 2:
            raise ValueError("a product measure needs at least two digits")
        if any(not math.isfinite(p) or p < 0 for p in probs):
            raise ValueError(f"probabilities must be finite and nonnegative: {probs}")
        if abs(math.fsum(probs) - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @property
    def b(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int) -> float:
        return self.probs[i]

    def __len__(self) -> int:
        return len(self.probs)

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "ProductMeasure":
        total = math.fsum(weights)
        if total <= 0:
            raise ValueError("weights must have positive total")
        return cls(tuple(w / total for w in weights))


def lebesgue(b: int) -> ProductMeasure:
    if b < 2:
        raise ValueError(f"base must be >= 2, got {b}")
    return ProductMeasure(tuple(1.0 / b for _ in range(b)))


def mu_valid_indices(m: ProductMeasure) -> tuple[int, ...]:
    return tuple(i for i, p in enumerate(m.probs) if p > 0)
