"""Neumann-series method.

For a Möbius ``phi`` mapping [-1, 1] into (-1, 1), the measure-averaged
powers of ``phi ∘ f_i`` expand in powers of ``phi``::

    sum_i p_i (phi ∘ f_i)^n = sum_k b[k, n] phi^k        (n >= 1)

With ``b[k, 0] = 0`` this defines an operator ``T`` on bounded sequences.
When the admissibility condition holds, ``|T| < 1`` and the exponent equals
``sum_n (T^n a)_0`` for the log-norm coefficient vector ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from numba import njit
from scipy.special import gammaln

from .errors import DegenerateMap, NacFailed, SingularPhi
from .moebius import ConstantMap, IfsSystem, MoebiusMap, conjugate, log_norm_ratios
from .recurring import series_coefficients
from .result import LyapunovResult, Method

NAC_MARGIN = 1e-9
AFFINE_Q1 = 1e-14


class Verdict(str, Enum):
    PASSED = "passed"
    FAILED = "failed"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class IndexConstants:
    """Per-index constants of ``Phi F_i Phi^-1 = [[p1, p2], [q1, q2]]``.

    ``s = p2/q2``, ``t = -q1/q2`` and ``w = (p1 q2 - p2 q1)/q2^2`` are the
    coefficients of ``phi ∘ f_i = s + w phi / (1 - t phi)``.
    """

    index: int
    p1: float
    p2: float
    q1: float
    q2: float
    s: float
    t: float
    w: float
    u1: float
    u2: float
    u3: float
    m: float
    row_lead: float  # m u3 / (1 - m)^2
    row_ratio: float  # u3 / (1 - m)
    ratio: float  # |(C delta - D gamma) / (A delta - B gamma)|
    affine: bool


@dataclass(frozen=True)
class NacReport:
    phi: MoebiusMap
    constants: dict[int, IndexConstants]
    rho1: float
    rho2: float
    rho3: float
    rho4: float
    ratio_phi: float
    r: float
    E: float
    norm_bound: float
    verdict: Verdict
    reasons: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASSED

    @property
    def max_ratio(self) -> float:
        return max([self.ratio_phi] + [c.ratio for c in self.constants.values()])

    def penalty(self) -> float:
        """Largest normalised constraint value; below 1 iff the condition holds."""
        return max(2 * self.rho1, self.rho2, self.rho3, self.rho4, self.max_ratio)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "verdict": self.verdict.value,
            "phi": self.phi.to_list(),
            "rho1": self.rho1,
            "rho2": self.rho2,
            "rho3": self.rho3,
            "rho4": self.rho4,
            "ratio_phi": self.ratio_phi,
            "r": self.r,
            "E": self.E,
            "norm_bound": self.norm_bound,
            "reasons": list(self.reasons),
            "per_index": {
                str(i): {"u1": c.u1, "u2": c.u2, "u3": c.u3, "m": c.m, "ratio": c.ratio}
                for i, c in sorted(self.constants.items())
            },
        }


@dataclass(frozen=True)
class TruncatedOperator:
    n: int
    entries: np.ndarray

    def sup_norm(self) -> float:
        """Induced norm on bounded sequences: the largest absolute row sum."""
        return float(np.abs(self.entries).sum(axis=1).max())


@dataclass(frozen=True)
class TruncationPlan:
    eps: float
    M: int
    N: int
    r: float
    E: float
    norm_bound: float

    @property
    def R_N(self) -> float:
        return self.E * self.r ** (self.N - 1)

    def bound(self) -> float:
        nb = self.norm_bound
        return nb ** (self.M + 1) / (1 - nb) + self.M * (self.M + 1) / 2 * self.R_N


def index_constants(i: int, phi: MoebiusMap, f: MoebiusMap, mat) -> IndexConstants:
    cd = conjugate(phi, f)
    p1, p2, q1, q2 = cd.p1, cd.p2, cd.q1, cd.q2
    if q2 == 0:
        raise SingularPhi(f"q2 vanishes for index {i}")
    s = p2 / q2
    t = -q1 / q2
    w = (p1 * q2 - p2 * q1) / (q2 * q2)
    u1, u3 = abs(s), abs(t)
    affine = u3 <= AFFINE_Q1
    if affine:
        # q1 -> 0 limit: only the binomial expansion of (s + w phi)^n survives,
        # whose k-th row sum is |w|^k / (1 - |s|)^(k+1)
        u2 = math.inf
        m = u1
        row_lead = abs(w) / (1 - m) ** 2 if m < 1 else math.inf
        row_ratio = abs(w) / (1 - m) if m < 1 else math.inf
        u3 = 0.0
    else:
        u2 = abs(w) / u3
        m = max(u1, u2)
        row_lead = m * u3 / (1 - m) ** 2 if m < 1 else math.inf
        row_ratio = u3 / (1 - m) if m < 1 else math.inf
    ratio = abs(log_norm_ratios(mat, phi)[1])
    return IndexConstants(i, p1, p2, q1, q2, s, t, w, u1, u2, u3, m, row_lead, row_ratio, ratio, affine)


def nac_report(sys: IfsSystem, phi: MoebiusMap, margin: float = NAC_MARGIN) -> NacReport:
    """Admissibility constants for ``phi`` and the verdict.

    Every strict inequality must hold with ``margin`` to pass; values within
    the margin of a threshold give an inconclusive verdict.
    """
    if phi.det == 0:
        raise SingularPhi(f"phi {phi.coeffs} is singular")
    reasons = []
    for i in sys.valid:
        if isinstance(sys.maps[i], ConstantMap):
            raise DegenerateMap(f"map f_{i} is constant; use the degenerate method")
    consts = {
        i: index_constants(i, phi, sys.maps[i], sys.matrices[i]) for i in sys.valid
    }
    cs = consts.values()
    rho1 = max(c.u1 for c in cs)
    rho2 = max(c.m for c in cs)
    rho3 = max(c.row_lead for c in cs)
    rho4 = max(c.row_ratio for c in cs)
    ratio_phi = abs(phi.c / phi.a) if phi.a != 0 else math.inf
    max_ratio = max([ratio_phi] + [c.ratio for c in cs])
    r = max(max_ratio, rho4)
    E = max(1 / (1 - r * rho1), rho3) if r * rho1 < 1 else math.inf
    norm_bound = max(rho1 / (1 - rho1), rho3) if rho1 < 1 else math.inf

    checks = [("rho1 < 1/2", rho1, 0.5), ("rho2 < 1", rho2, 1.0), ("rho3 < 1", rho3, 1.0),
              ("rho4 < 1", rho4, 1.0), ("|C/A| < 1", ratio_phi, 1.0)]
    checks += [(f"ratio_{c.index} < 1", c.ratio, 1.0) for c in cs]
    verdict = Verdict.PASSED
    if not phi.pole_outside():
        verdict = Verdict.FAILED
        reasons.append("phi has a pole in [-1, 1]")
    else:
        lo, hi = phi(-1.0), phi(1.0)
        if max(abs(lo), abs(hi)) >= 1 - margin:
            verdict = Verdict.FAILED
            reasons.append("phi does not map [-1, 1] into (-1, 1)")
    for name, value, limit in checks:
        slack = margin + 1e-12 * abs(limit)
        if not math.isfinite(value) or value >= limit + slack:
            verdict = Verdict.FAILED
            reasons.append(f"{name} fails ({value:.6g})")
        elif value > limit - slack and verdict is Verdict.PASSED:
            verdict = Verdict.INCONCLUSIVE
            reasons.append(f"{name} within margin ({value:.17g})")
    return NacReport(phi, consts, rho1, rho2, rho3, rho4, ratio_phi, r, E, norm_bound,
                     verdict, tuple(reasons))


@njit(cache=True)
def _accumulate_columns(T, p, s, v, t):
    # y_k = s x_k + v x_{k-1} + t y_{k-1}, applied to column n-1 to get column n
    N = T.shape[0]
    prev = np.zeros(N)
    prev[0] = 1.0
    cur = np.zeros(N)
    for n in range(1, N):
        y = 0.0
        x_last = 0.0
        for k in range(N):
            y = s * prev[k] + v * x_last + t * y
            x_last = prev[k]
            cur[k] = y
            T[k, n] += p * y
        prev, cur = cur, prev


def build_T(sys: IfsSystem, phi: MoebiusMap, N: int, report: Optional[NacReport] = None) -> TruncatedOperator:
    """The ``N x N`` truncation of ``T``.

    Column ``n`` holds the coefficients of ``sum_i p_i g_i(z)^n`` with
    ``g_i(z) = s + w z / (1 - t z) = (s + (w - s t) z) / (1 - t z)``, so each
    column is the previous one filtered by that rational function.
    """
    if report is None:
        report = nac_report(sys, phi)
    T = np.zeros((N, N))
    if N < 2:
        return TruncatedOperator(N, T)
    for i, c in report.constants.items():
        _accumulate_columns(T, float(sys.measure[i]), float(c.s), float(c.w - c.s * c.t), float(c.t))
    return TruncatedOperator(N, T)


def build_T_explicit(sys: IfsSystem, phi: MoebiusMap, N: int, report: Optional[NacReport] = None) -> TruncatedOperator:
    """Entry-by-entry closed form with log-space binomials (reference path, O(N^3))."""
    if report is None:
        report = nac_report(sys, phi)
    T = np.zeros((N, N))
    k = np.arange(N)[:, None].astype(float)
    n = np.arange(N)[None, :].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i, c in report.constants.items():
            p = sys.measure[i]
            T[0, 1:] += p * c.s ** np.arange(1, N)
            ls, lw, lt = (math.log(abs(v)) if v != 0 else -math.inf for v in (c.s, c.w, c.t))
            block = np.zeros((N, N))
            for ell in range(1, N):
                mask = (k >= ell) & (n >= ell)
                if not mask.any():
                    break
                lbin = (gammaln(n + 1) - gammaln(ell + 1) - gammaln(n - ell + 1)
                        + gammaln(k) - gammaln(ell) - gammaln(k - ell + 1))
                # 0 * log(0) terms contribute factor 1
                logmag = lbin + np.where(n - ell > 0, (n - ell) * ls, 0.0) + ell * lw \
                    + np.where(k - ell > 0, (k - ell) * lt, 0.0)
                sign = (np.sign(c.s) ** (n - ell)) * (np.sign(c.w) ** ell) * (np.sign(c.t) ** (k - ell))
                block += np.where(mask, sign * np.exp(logmag), 0.0)
            T[1:, 1:] += p * block[1:, 1:]
    return TruncatedOperator(N, T)


def a_vector(sys: IfsSystem, phi: MoebiusMap, N: int) -> np.ndarray:
    return series_coefficients(sys, phi, N)


def _smallest_above(x: float) -> int:
    """Smallest integer strictly greater than ``x``."""
    return math.floor(x) + 1


def truncation_plan(report: NacReport, eps: float) -> TruncationPlan:
    """Smallest ``M`` then smallest ``N`` making both truncation errors ``< eps/2``.

    Solved in logarithms so tiny ``eps`` (1e-50 and below) is fine.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    nb, r, E = report.norm_bound, report.r, report.E
    if not (0 <= nb < 1 and 0 < r < 1):
        raise NacFailed("truncation plan needs norm bound and r in (0, 1)")
    log_half = math.log(eps / 2)

    def tail_ok(M: int) -> bool:
        if nb == 0:
            return True
        return (M + 1) * math.log(nb) - math.log1p(-nb) < log_half

    if nb == 0:
        M = 0
    else:
        M = max(0, _smallest_above((log_half + math.log1p(-nb)) / math.log(nb)) - 1)
    while M > 0 and tail_ok(M - 1):
        M -= 1
    while not tail_ok(M):
        M += 1

    def trunc_ok(N: int) -> bool:
        if M == 0:
            return True
        return math.log(M * (M + 1) / 2) + math.log(E) + (N - 1) * math.log(r) < log_half

    if M == 0:
        N = 1
    else:
        N = max(1, _smallest_above((log_half - math.log(M * (M + 1) / 2 * E)) / math.log(r)) + 1)
    while N > 1 and trunc_ok(N - 1):
        N -= 1
    while not trunc_ok(N):
        N += 1
    return TruncationPlan(eps, M, N, r, E, nb)


def neumann_sum(T: TruncatedOperator, a: np.ndarray, M: int) -> float:
    """``sum_{n=0}^{M} (T^n a)_0`` by repeated matrix-vector products."""
    y = np.array(a[: T.n], dtype=float)
    total = [y[0]]
    for _ in range(M):
        y = T.entries @ y
        total.append(y[0])
    return math.fsum(total)


def lyapunov_neumann(
    sys: IfsSystem,
    phi: MoebiusMap,
    eps: float = 1e-10,
    report: Optional[NacReport] = None,
) -> LyapunovResult:
    if report is None:
        report = nac_report(sys, phi)
    if not report.passed:
        raise NacFailed(f"admissibility condition {report.verdict.value}: {'; '.join(report.reasons)}")
    # the error analysis assumes |a_n| <= r^(n-1); rescale eps by the excess
    probe = a_vector(sys, phi, 2)
    scale = max(1.0, abs(probe[1]))
    plan = truncation_plan(report, eps / scale)
    a = a_vector(sys, phi, max(plan.N, 2))
    scale = max(scale, float(np.max(np.abs(a[1:plan.N]) / report.r ** np.arange(plan.N - 1))) if plan.N > 1 else 1.0)
    if scale * plan.bound() > eps:
        plan = truncation_plan(report, eps / scale)
        a = a_vector(sys, phi, max(plan.N, 2))
    T = build_T(sys, phi, plan.N, report)
    lam = neumann_sum(T, a, plan.M)
    return LyapunovResult.make(
        lam,
        sys.b,
        Method.NEUMANN,
        scale * plan.bound(),
        {
            "phi": phi.to_list(),
            "M": plan.M,
            "N": plan.N,
            "norm_bound": report.norm_bound,
            "r": report.r,
            "E": report.E,
            "coefficient_scale": scale,
        },
    )
