from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Method(str, Enum):
    DEGENERATE = "degenerate"
    RECURRING = "recurring"
    NEUMANN = "neumann"
    MONTE_CARLO = "monte_carlo"


def dim_from_lambda(lam: float, b: int) -> float:
    """Hausdorff dimension of the intersection, ``lambda / log b``."""
    if b < 2:
        raise ValueError(f"base must be >= 2, got {b}")
    return lam / math.log(b)


@dataclass(frozen=True)
class LyapunovResult:
    """Top exponent and intersection dimension.

    ``error_bound`` is a rigorous truncation bound for the exact methods and
    three standard errors for Monte Carlo.
    """

    lam: float
    dimension: float
    method: Method
    error_bound: float
    b: int
    metadata: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def make(cls, lam: float, b: int, method: Method, error_bound: float, metadata=None):
        return cls(float(lam), dim_from_lambda(lam, b), Method(method), float(error_bound), b,
                   dict(metadata or {}))

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "dimension": self.dimension,
            "method": self.method.value,
            "error_bound": self.error_bound,
            "dimension_error_bound": self.error_bound / math.log(self.b),
            "b": self.b,
            "metadata": self.metadata,
        }
