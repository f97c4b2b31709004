"""Transfer matrices of a pair of base-b digit sets, and instance classification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import TheoremHypothesis
from .measures import ProductMeasure

Matrix = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class DigitPair:
    b: int
    d1: tuple[int, ...]
    d2: tuple[int, ...]

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.b!r}")
        object.__setattr__(self, "b", int(self.b))
        for name in ("d1", "d2"):
            digits = tuple(int(d) for d in getattr(self, name))
            if not digits:
                raise ValueError(f"{name} must be nonempty")
            if any(b2 <= a for a, b2 in zip(digits, digits[1:])):
                raise ValueError(f"{name} must be strictly increasing: {digits}")
            if digits[0] < 0 or digits[-1] > self.b - 1:
                raise ValueError(f"{name} digits must lie in [0, {self.b - 1}]: {digits}")
            object.__setattr__(self, name, digits)

    @classmethod
    def from_sets(cls, b: int, d1: Iterable[int], d2: Iterable[int]) -> "DigitPair":
        return cls(b, tuple(sorted(set(d1))), tuple(sorted(set(d2))))

    @classmethod
    def missing_one(cls, b: int, tau: int, u: int) -> "DigitPair":
        full = set(range(b))
        return cls.from_sets(b, full - {tau}, full - {u})


@dataclass(frozen=True)
class TransferMatrices:
    mats: tuple[Matrix, ...]

    def __post_init__(self):
        mats = tuple(
            ((int(m[0][0]), int(m[0][1])), (int(m[1][0]), int(m[1][1]))) for m in self.mats
        )
        if any(e < 0 for m in mats for row in m for e in row):
            raise ValueError("transfer matrices must be nonnegative")
        object.__setattr__(self, "mats", mats)

    @property
    def b(self) -> int:
        return len(self.mats)

    def __len__(self) -> int:
        return len(self.mats)

    def __getitem__(self, u: int) -> Matrix:
        return self.mats[u]

    def __iter__(self):
        return iter(self.mats)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.mats, dtype=float)
        arr.setflags(write=False)
        return arr

    def determinants(self) -> tuple[int, ...]:
        return tuple(m[0][0] * m[1][1] - m[0][1] * m[1][0] for m in self.mats)

    def to_lists(self) -> list[list[list[int]]]:
        return [[list(row) for row in m] for m in self.mats]


def build_matrices(pair: DigitPair) -> TransferMatrices:
    """``A_u(i, j) = #((D1 + i + u) ∩ (D2 + j b))`` for ``u = 0..b-1``."""
    b = pair.b
    d2_shifted = (set(pair.d2), {d + b for d in pair.d2})
    mats = []
    for u in range(b):
        rows = []
        for i in (0, 1):
            shifted = {d + i + u for d in pair.d1}
            rows.append(tuple(len(shifted & d2_shifted[j]) for j in (0, 1)))
        mats.append(tuple(rows))
    return TransferMatrices(tuple(mats))


def is_rank_one(m: Matrix) -> bool:
    # exact integer determinant; the zero matrix counts as rank <= 1
    return m[0][0] * m[1][1] - m[0][1] * m[1][0] == 0


def is_degenerate(tm: TransferMatrices, measure: ProductMeasure) -> Optional[int]:
    """Smallest mu-valid index whose matrix has rank <= 1, else ``None``."""
    if measure.b != tm.b:
        raise ValueError(f"measure has {measure.b} atoms but there are {tm.b} matrices")
    for i, m in enumerate(tm.mats):
        if measure[i] > 0 and is_rank_one(m):
            return i
    return None


def rank_one_indices(tm: TransferMatrices, measure: Optional[ProductMeasure] = None) -> list[int]:
    return [
        i
        for i, m in enumerate(tm.mats)
        if is_rank_one(m) and (measure is None or measure[i] > 0)
    ]


class MissingOneClass(str, Enum):
    DEGENERATE = "degenerate"
    KERNEL_EXPANDABLE = "kernel_expandable"


def classify_missing_one(b: int, tau: int, u: int) -> MissingOneClass:
    """Classify ``D1 = full \\ {tau}``, ``D2 = full \\ {u}`` for ``b >= 7``."""
    if b < 7:
        raise TheoremHypothesis(f"classification is only established for b >= 7, got b={b}")
    if not (0 <= tau < b and 0 <= u < b):
        raise ValueError(f"digits must lie in [0, {b - 1}]: tau={tau}, u={u}")
    if tau not in (0, b - 1) and tau + u == b - 1:
        return MissingOneClass.KERNEL_EXPANDABLE
    return MissingOneClass.DEGENERATE


def _upper_family(b: int, tau: int) -> list[Matrix]:
    # six-case closed form, valid for (b-1)/2 < tau <= b-2
    mats = []
    for i in range(b):
        if i < b - tau - 1:
            m = ((b - i - 2, i), (b - i - 3, i + 1))
        elif i == b - tau - 1:
            m = ((tau - 1, b - tau - 1), (tau, b - tau - 2))
        elif i < 2 * b - 2 * tau - 2:
            m = ((b - i, i - 2), (b - i - 1, i - 1))
        elif i == 2 * b - 2 * tau - 2:
            m = ((2 * tau - b + 2, 2 * b - 2 * tau - 4), (2 * tau - b + 1, 2 * b - 2 * tau - 2))
        elif i == 2 * b - 2 * tau - 1:
            m = ((2 * tau - b + 1, 2 * b - 2 * tau - 2), (2 * tau - b, 2 * b - 2 * tau - 2))
        else:
            m = ((b - i, i - 2), (b - i - 1, i - 1))
        mats.append(m)
    return mats


def _middle_family(b: int) -> list[Matrix]:
    # tau = (b-1)/2 with b odd: D1 = D2, the pair is its own mirror image
    t = (b - 1) // 2
    mats = []
    for i in range(b):
        if i == 0:
            m = ((b - 1, 0), (b - 3, 1))
        elif i < t:
            m = ((b - i - 2, i), (b - i - 3, i + 1))
        elif i == t:
            m = ((t - 1, t), (t, t - 1))
        elif i == t + 1:
            m = ((t, t - 1), (t - 1, t))
        elif i < b - 1:
            m = ((b - i, i - 2), (b - i - 1, i - 1))
        else:
            m = ((1, b - 3), (0, b - 1))
        mats.append(m)
    return mats


def toothless_matrices(b: int, tau: int) -> TransferMatrices:
    """Closed-form matrices for ``D1 = full \\ {tau}``, ``D2 = full \\ {b-1-tau}``.

    Below the midpoint the mirrored pair is used: replacing ``tau`` by
    ``b-1-tau`` reverses the index order and rotates each matrix by 180
    degrees, ``A'_u(i, j) = A_{b-1-u}(1-i, 1-j)``.
    """
    if b < 7:
        raise TheoremHypothesis(f"closed form requires b >= 7, got b={b}")
    if not 1 <= tau <= b - 2:
        raise ValueError(f"tau must lie in [1, {b - 2}], got {tau}")
    if 2 * tau == b - 1:
        return TransferMatrices(tuple(_middle_family(b)))
    if 2 * tau > b - 1:
        return TransferMatrices(tuple(_upper_family(b, tau)))
    mirrored = _upper_family(b, b - 1 - tau)
    mats = []
    for u in range(b):
        m = mirrored[b - 1 - u]
        mats.append(((m[1][1], m[1][0]), (m[0][1], m[0][0])))
    return TransferMatrices(tuple(mats))


def matrices_from_lists(rows: Sequence[Sequence[Sequence[int]]]) -> TransferMatrices:
    return TransferMatrices(tuple(tuple(tuple(r) for r in m) for m in rows))
