"""Affine co-invariant method.

If a Möbius ``phi`` satisfies ``phi ∘ f_i = r_i phi + s_i`` for every mu-valid
``i``, the stationary moments ``xi_n = ∫ phi^n dnu`` obey a triangular
recurrence, and the exponent is ``sum_n a_n xi_n`` with ``a`` the log-norm
coefficients in the variable ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NoConjugator, ResonantDenominator
from .measures import ProductMeasure
from .moebius import (
    ConstantMap,
    IfsSystem,
    MoebiusMap,
    conjugate,
    fixed_points,
    fixes_infinity,
    log_norm_coefficients,
    log_norm_ratios,
)
from .result import LyapunovResult, Method

PHI_SUP = 0.95
RESIDUAL_TOL = 1e-10
AFFINE_TOL = 1e-12
RESONANCE_TOL = 1e-12
N_MAX_DEFAULT = 120


@dataclass(frozen=True)
class CoInvariantData:
    phi: MoebiusMap
    rs: dict[int, tuple[float, float]]
    residual: float
    candidates: tuple[float, ...] = ()

    @property
    def sup_phi(self) -> float:
        return self.phi.sup_abs()


@dataclass(frozen=True)
class MomentSequence:
    xs: np.ndarray
    tail_bound: float = 0.0

    def __getitem__(self, n):
        return self.xs[n]

    def __len__(self):
        return len(self.xs)


def _grid(n: int = 101) -> np.ndarray:
    return np.linspace(-1.0, 1.0, n)


def verify_conjugator(sys: IfsSystem, phi: MoebiusMap) -> Optional[CoInvariantData]:
    """Check that ``phi`` conjugates every mu-valid map to an affine one.

    Returns ``None`` when some ``q1(i)`` is not zero or the pointwise defect
    on a 101-point grid exceeds ``1e-10``.
    """
    if not phi.pole_outside():
        return None
    rs = {}
    residual = 0.0
    x = _grid()
    phix = phi(x)
    for i in sys.valid:
        f = sys.maps[i]
        if isinstance(f, ConstantMap):
            # phi(f(x)) = 0 * phi(x) + phi(alpha)
            rs[i] = (0.0, float(phi(f.value)))
            continue
        cd = conjugate(phi, f)
        scale = max(abs(cd.p1), abs(cd.p2), abs(cd.q1), abs(cd.q2))
        if abs(cd.q1) > AFFINE_TOL * scale or cd.q2 == 0:
            return None
        r, s = cd.p1 / cd.q2, cd.p2 / cd.q2
        residual = max(residual, float(np.max(np.abs(phi(f(x)) - (r * phix + s)))))
        rs[i] = (r, s)
    if residual > RESIDUAL_TOL:
        return None
    return CoInvariantData(phi, rs, residual)


def phi_with_pole(c: float, sup: float = PHI_SUP) -> MoebiusMap:
    """``kappa (x - 1/c) / (x - c)``: pole at ``c``, odd endpoint values, sup-norm ``sup``.

    ``c = inf`` gives the linear map ``sup * x``.
    """
    if math.isinf(c):
        return MoebiusMap(sup, 0.0, 0.0, 1.0)
    if abs(c) <= 1:
        raise ValueError(f"pole {c} must lie outside [-1, 1]")
    x0 = 1.0 / c
    # phi(1) = kappa (1 - x0) / (1 - c); pick kappa so |phi(+-1)| = sup
    kappa = sup * (1 - c) / (1 - x0)
    return MoebiusMap(kappa, -kappa * x0, 1.0, -c)


def common_fixed_points(sys: IfsSystem, tol: float = 1e-9) -> list[float]:
    """Fixed points (including ``inf``) shared by every nonconstant mu-valid map.

    Constant maps are conjugated to constants by any ``phi``, so they impose
    no condition.
    """
    maps = [sys.maps[i] for i in sys.valid if not isinstance(sys.maps[i], ConstantMap)]
    nonid = [f for f in maps if not f.is_identity()]
    if not nonid:
        return [math.inf]
    candidates = list(fixed_points(nonid[0]))
    if all(fixes_infinity(f) for f in nonid):
        candidates.append(math.inf)
    common = []
    for c in candidates:
        if math.isinf(c):
            common.append(c)
            continue
        if all(abs(f(c) - c) <= tol * max(1.0, abs(c)) for f in nonid):
            common.append(c)
    return common


def find_affine_conjugator(sys: IfsSystem) -> Optional[CoInvariantData]:
    """First verified ``phi`` whose pole sits at a common fixed point outside [-1, 1]."""
    common = common_fixed_points(sys)
    outside = [c for c in common if abs(c) > 1]
    for c in outside:
        data = verify_conjugator(sys, phi_with_pole(c))
        if data is not None:
            return CoInvariantData(data.phi, data.rs, data.residual, tuple(outside))
    return None


def moments(data: CoInvariantData, measure: ProductMeasure, n_max: int = N_MAX_DEFAULT) -> MomentSequence:
    """``xi_0..xi_n_max`` from the stationarity recurrence."""
    idx = sorted(data.rs)
    p = np.array([measure[i] for i in idx])
    r = np.array([data.rs[i][0] for i in idx])
    s = np.array([data.rs[i][1] for i in idx])
    xs = np.zeros(n_max + 1)
    xs[0] = 1.0
    # rpow[k] = r**k, spow[m] = s**m per index
    rpow = r[None, :] ** np.arange(n_max + 1)[:, None]
    spow = s[None, :] ** np.arange(n_max + 1)[:, None]
    for n in range(1, n_max + 1):
        denom = 1.0 - float(p @ rpow[n])
        if abs(denom) <= RESONANCE_TOL:
            raise ResonantDenominator(f"1 - sum_i p_i r_i^{n} = {denom:.3g}")
        k = np.arange(n)
        weights = (rpow[:n] * spow[n - k]) @ p
        binom = np.array([math.comb(n, kk) for kk in k], dtype=float)
        xs[n] = math.fsum(binom * weights * xs[:n]) / denom
    sup = data.sup_phi
    return MomentSequence(xs, tail_bound=sup ** (n_max + 1))


def coefficient_ratio(sys: IfsSystem, phi: MoebiusMap) -> float:
    """Largest geometric ratio of the log-norm coefficient streams."""
    r = 0.0
    for i in sys.valid:
        r = max(r, *map(abs, log_norm_ratios(sys.matrices[i], phi)))
    return r


def series_coefficients(sys: IfsSystem, phi: MoebiusMap, n_terms: int) -> np.ndarray:
    """Measure-weighted log-norm coefficients ``a_n = sum_i p_i a_n^(i)``."""
    a = np.zeros(n_terms)
    for i in sys.valid:
        a += sys.measure[i] * log_norm_coefficients(sys.matrices[i], phi, n_terms)
    return a


def truncation_index(q: float, eps: float, cap: int = 100_000) -> int:
    """Smallest ``N`` with ``2 sum_{n>N} q^n / n <= eps``, using ``q^(N+1) / ((N+1)(1-q))``."""
    if q <= 0:
        return 0
    for N in range(cap):
        if 2 * q ** (N + 1) / ((N + 1) * (1 - q)) <= eps:
            return N
    raise ValueError(f"cannot reach eps={eps} with ratio {q}")


def lyapunov_recurring(
    sys: IfsSystem, data: Optional[CoInvariantData] = None, eps: float = 1e-10
) -> LyapunovResult:
    if data is None:
        data = find_affine_conjugator(sys)
        if data is None:
            raise NoConjugator("no affine co-invariant Möbius map found")
    ratio = coefficient_ratio(sys, data.phi)
    sup = data.sup_phi
    q = ratio * sup
    N = truncation_index(q, eps)
    a = series_coefficients(sys, data.phi, N + 1)
    xi = moments(data, sys.measure, N)
    lam = math.fsum(a * xi.xs)
    bound = 2 * q ** (N + 1) / ((N + 1) * (1 - q)) if q > 0 else 0.0
    return LyapunovResult.make(
        lam,
        sys.b,
        Method.RECURRING,
        bound,
        {
            "phi": data.phi.to_list(),
            "r_s": {str(i): list(v) for i, v in sorted(data.rs.items())},
            "terms": N + 1,
            "coefficient_ratio": ratio,
            "phi_sup": sup,
            "residual": data.residual,
            "pole_candidates": [c if math.isfinite(c) else "inf" for c in data.candidates],
        },
    )
