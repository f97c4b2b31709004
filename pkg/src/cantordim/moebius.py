"""Möbius maps on [-1, 1] induced by nonnegative 2x2 matrices.

A row vector ``v`` of the simplex is identified with ``x`` in [-1, 1] through
``v = ((1+x)/2, (1-x)/2)``; the projective action ``v -> vA / |vA|_1`` then
becomes the real Möbius map returned by :func:`induced_map`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .digitsets import Matrix, TransferMatrices, build_matrices, DigitPair
from .errors import (
    IdentityMap,
    PoleInside,
    RatioNotContractive,
    SingularPhi,
    ZeroProduct,
    ZeroRowSum,
)
from .measures import ProductMeasure, mu_valid_indices

EQ_TOL = 1e-12


@dataclass(frozen=True)
class MoebiusMap:
    """``x -> (a x + b) / (c x + d)``, defined up to a nonzero common factor."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)))
        if not all(math.isfinite(v) for v in self.coeffs):
            raise ValueError(f"non-finite coefficients {self.coeffs}")
        if self.a == self.b == self.c == self.d == 0:
            raise ValueError("all-zero coefficient matrix")

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        (a, b), (c, d) = m
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def coeffs(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def is_constant(self) -> bool:
        return False

    def __call__(self, x):
        return (self.a * x + self.b) / (self.c * x + self.d)

    def normalized(self) -> tuple[float, float, float, float]:
        """Coefficients scaled so the largest magnitude is 1 with a positive sign."""
        coeffs = self.coeffs
        k = max(range(4), key=lambda i: abs(coeffs[i]))
        s = coeffs[k]
        return tuple(v / s for v in coeffs)

    def approx_equal(self, other: "MoebiusMap", tol: float = EQ_TOL) -> bool:
        return all(abs(p - q) <= tol for p, q in zip(self.normalized(), other.normalized()))

    def is_affine(self, tol: float = EQ_TOL) -> bool:
        _, _, c, _ = self.normalized()
        return abs(c) <= tol

    def is_identity(self, tol: float = EQ_TOL) -> bool:
        return self.approx_equal(MoebiusMap.identity(), tol)

    @property
    def pole(self) -> float:
        """Real pole ``-d/c``; ``inf`` for affine maps."""
        if self.c == 0:
            return math.inf
        return -self.d / self.c

    def pole_outside(self, lo: float = -1.0, hi: float = 1.0) -> bool:
        p = self.pole
        return not (lo <= p <= hi)

    def compose(self, inner: "MoebiusMap") -> "MoebiusMap":
        """``self ∘ inner``."""
        return MoebiusMap.from_matrix(self.matrix @ inner.matrix)

    def inverse(self) -> "MoebiusMap":
        if self.det == 0:
            raise SingularPhi(f"map {self.coeffs} is not invertible")
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def sup_abs(self, lo: float = -1.0, hi: float = 1.0) -> float:
        low, high = image_interval(self, lo, hi)
        return max(abs(low), abs(high))

    def to_list(self) -> list[float]:
        return list(self.coeffs)


@dataclass(frozen=True)
class ConstantMap:
    """Induced map of a rank-one matrix: every point goes to ``value``.

    ``source`` keeps the (singular) coefficient matrix for reference.
    """

    value: float
    source: Optional[tuple[float, float, float, float]] = None

    @property
    def is_constant(self) -> bool:
        return True

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.full_like(x, self.value, dtype=float)
        return self.value

    def is_affine(self, tol: float = EQ_TOL) -> bool:
        return True


AnyMap = Union[MoebiusMap, ConstantMap]


@dataclass(frozen=True)
class ConjugationData:
    """Entries of ``Phi F Phi^-1`` (computed with the adjugate of Phi)."""

    p1: float
    p2: float
    q1: float
    q2: float

    @property
    def det(self) -> float:
        return self.p1 * self.q2 - self.p2 * self.q1

    def as_map(self) -> MoebiusMap:
        return MoebiusMap(self.p1, self.p2, self.q1, self.q2)


def induced_coefficients(m) -> tuple[float, float, float, float]:
    (p, q), (r, s) = m
    return (p - q - r + s, p - q + r - s, p + q - r - s, p + q + r + s)


def has_zero_row(m) -> bool:
    (p, q), (r, s) = m
    return p + q == 0 or r + s == 0


def induced_map(m, allow_zero_row: bool = False) -> AnyMap:
    """Möbius map induced by a nonzero nonnegative matrix ``[[p, q], [r, s]]``.

    Rank-one matrices give a :class:`ConstantMap` with value
    ``(p - q + r - s) / (p + q + r + s)``.
    """
    (p, q), (r, s) = m
    if min(p, q, r, s) < 0:
        raise ValueError(f"matrix must be nonnegative: {m}")
    if p == q == r == s == 0:
        raise ZeroProduct(f"zero matrix {m} induces no map")
    if has_zero_row(m) and not allow_zero_row:
        raise ZeroRowSum(f"matrix {m} has a zero row; the integrand diverges at an endpoint")
    coeffs = induced_coefficients(m)
    if p * s - q * r == 0:
        return ConstantMap(coeffs[1] / coeffs[3], source=coeffs)
    return MoebiusMap(*coeffs)


def conjugate(phi: MoebiusMap, f: MoebiusMap) -> ConjugationData:
    """``Phi F adj(Phi)``, proportional to ``Phi F Phi^-1``."""
    if phi.det == 0:
        raise SingularPhi(f"phi {phi.coeffs} is singular")
    if isinstance(f, ConstantMap):
        raise ValueError("cannot conjugate a constant map")
    P = phi.matrix
    adj = np.array([[phi.d, -phi.b], [-phi.c, phi.a]])
    X = P @ f.matrix @ adj
    return ConjugationData(float(X[0, 0]), float(X[0, 1]), float(X[1, 0]), float(X[1, 1]))


def fixed_points(f: MoebiusMap) -> tuple[float, ...]:
    """Real solutions of ``f(x) = x``, i.e. roots of ``c x^2 + (d - a) x - b``.

    Affine maps also fix infinity; that point is not reported here.
    """
    if f.is_identity():
        raise IdentityMap("the identity fixes every point")
    a, b, c, d = f.normalized()
    if abs(c) <= EQ_TOL:
        if abs(d - a) <= EQ_TOL:
            return ()
        return (b / (d - a),)
    # c x^2 + (d - a) x - b = 0, solved stably
    B = d - a
    disc = B * B + 4 * c * b
    # relative to the terms, so near-parabolic maps with tiny c keep both roots
    tol = EQ_TOL * max(B * B, abs(4 * c * b))
    if disc < -tol:
        return ()
    if abs(disc) <= tol:
        return (-B / (2 * c),)
    sq = math.sqrt(disc)
    qv = -0.5 * (B + math.copysign(sq, B)) if B != 0 else -0.5 * sq
    if qv == 0:
        x = sq / (2 * c)
        return tuple(sorted((x, -x)))
    roots = (qv / c, -b / qv)
    return tuple(sorted(r + 0.0 for r in roots))


def fixes_infinity(f: AnyMap) -> bool:
    return isinstance(f, MoebiusMap) and f.is_affine()


def image_interval(f: AnyMap, lo: float, hi: float) -> tuple[float, float]:
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if isinstance(f, ConstantMap):
        return (f.value, f.value)
    if not f.pole_outside(lo, hi):
        raise PoleInside(f"pole {f.pole} lies in [{lo}, {hi}]")
    ya, yb = f(lo), f(hi)
    return (min(ya, yb), max(ya, yb))


def log_norm(m, x):
    """``log |((1+x)/2, (1-x)/2) A|_1`` (vectorised over ``x``)."""
    (p, q), (r, s) = m
    return np.log((1 + x) / 2 * (p + q) + (1 - x) / 2 * (r + s))


def log_norm_ratios(m, phi: MoebiusMap) -> tuple[float, float]:
    """The two geometric ratios ``C/A`` and ``(C d - D c)/(A d - B c)``.

    Here ``A, B, C, D`` are the coefficients of ``phi`` and ``c, d`` the
    denominator coefficients of the map induced by ``m``.
    """
    _, _, gam, dlt = induced_coefficients(m)
    A, B, C, D = phi.coeffs
    return C / A, (C * dlt - D * gam) / (A * dlt - B * gam)


def log_norm_coefficients(m, phi: MoebiusMap, n_terms: int) -> np.ndarray:
    """Power-series coefficients of the log-norm integrand in the variable ``phi(x)``.

    Returns ``a[0..n_terms-1]`` with
    ``log |((1+x)/2, (1-x)/2) A|_1 = sum_n a[n] phi(x)**n`` on [-1, 1].
    """
    if has_zero_row(m):
        raise ZeroRowSum(f"matrix {m} has a zero row")
    A, B, C, D = phi.coeffs
    if A == 0:
        raise RatioNotContractive("phi has zero leading coefficient")
    _, _, gam, dlt = induced_coefficients(m)
    lead = A * dlt - B * gam
    if lead == 0:
        raise RatioNotContractive("A*delta - B*gamma vanishes")
    rho_phi = C / A
    rho_f = (C * dlt - D * gam) / lead
    if abs(rho_phi) >= 1 or abs(rho_f) >= 1:
        raise RatioNotContractive(
            f"ratios |C/A| = {abs(rho_phi):.6g}, |(C d - D c)/(A d - B c)| = {abs(rho_f):.6g}"
        )
    arg = lead / (2 * A)
    if arg <= 0:
        raise RatioNotContractive(f"log argument {arg} is not positive")
    out = np.empty(n_terms)
    if n_terms == 0:
        return out
    out[0] = math.log(arg)
    n = np.arange(1, n_terms)
    out[1:] = (rho_phi**n - rho_f**n) / n
    return out


@dataclass(frozen=True)
class IfsSystem:
    """The b transfer matrices, their induced maps, and a product measure.

    ``maps[i]`` is ``None`` only for a zero matrix at a non-mu-valid index.
    ``zero_rows`` lists indices whose matrix has a zero row (the integrand
    is unbounded at one endpoint of [-1, 1]).
    """

    matrices: TransferMatrices
    measure: ProductMeasure
    maps: tuple[Optional[AnyMap], ...] = field(init=False)
    zero_rows: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.measure.b != self.matrices.b:
            raise ValueError(
                f"measure has {self.measure.b} atoms but there are {self.matrices.b} matrices"
            )
        maps = []
        zero_rows = []
        for i, m in enumerate(self.matrices):
            if all(e == 0 for row in m for e in row):
                if self.measure[i] > 0:
                    raise ZeroProduct(f"matrix A_{i} is zero and carries positive weight")
                maps.append(None)
                continue
            if has_zero_row(m):
                zero_rows.append(i)
            maps.append(induced_map(m, allow_zero_row=True))
        object.__setattr__(self, "maps", tuple(maps))
        object.__setattr__(self, "zero_rows", tuple(zero_rows))

    @classmethod
    def from_pair(cls, pair: DigitPair, measure: ProductMeasure) -> "IfsSystem":
        return cls(build_matrices(pair), measure)

    @property
    def b(self) -> int:
        return self.matrices.b

    @property
    def valid(self) -> tuple[int, ...]:
        return mu_valid_indices(self.measure)

    @property
    def probs(self) -> tuple[float, ...]:
        return self.measure.probs

    def constant_indices(self) -> list[int]:
        return [i for i in self.valid if isinstance(self.maps[i], ConstantMap)]

    def integrand(self, x):
        """``sum_k p_k log |((1+x)/2, (1-x)/2) A_k|_1``."""
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for k in self.valid:
            total = total + self.measure[k] * log_norm(self.matrices[k], x)
        return total


def moebius_from_list(values: Sequence[float]) -> MoebiusMap:
    if len(values) != 4:
        raise ValueError(f"a Möbius map needs four coefficients, got {len(values)}")
    return MoebiusMap(*values)
