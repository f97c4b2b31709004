"""Lyapunov exponent of degenerate systems (some mu-valid matrix has rank one).

The stationary measure is then discrete: it is the law of ``f_w(alpha)`` where
``alpha`` is the value of the constant map ``f_j`` and ``w`` is a random word
over the other indices, with geometric length.  Instead of enumerating words,
the weighted point masses of each word length are propagated one level at a
time, merging coincident points and pruning negligible ones.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

import numpy as np

from .errors import NotDegenerate, UnboundedIntegrand
from .moebius import ConstantMap, IfsSystem, image_interval
from .result import LyapunovResult, Method

log = logging.getLogger(__name__)

MERGE_TOL = 1e-9
PRUNE_BELOW = 0.0
MAX_ATOMS = 1 << 19
HULL_TOL = 1e-12
HULL_PAD = 1e-9


@dataclass
class OrbitMeasure:
    """Weighted orbit points of one word length.

    ``dropped_mass`` is the pruned weight carried forward to this level, so
    ``weights.sum() + dropped_mass == (1 - p_j) ** level``.  ``dropped_total``
    is the raw weight ever pruned (each unit of it can shift the exponent by
    at most ``C``).
    """

    points: np.ndarray
    weights: np.ndarray
    level: int = 0
    dropped_mass: float = 0.0
    dropped_total: float = 0.0

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class DegenerateConfig:
    merge_tol: float = MERGE_TOL
    prune_below: float = PRUNE_BELOW
    max_levels: int = 2000
    merge: bool = True
    # weight that may be dropped per level, lightest atoms first
    level_budget: float = 0.0
    # let lyapunov_degenerate derive level_budget from eps
    auto_budget: bool = True
    # hard cap on atoms per level; the excess (lightest first) counts as pruned
    max_atoms: int = MAX_ATOMS


def orbit_hull(sys: IfsSystem, alpha: float, max_iter: int = 100_000) -> tuple[float, float]:
    """An interval containing ``alpha`` and mapped into itself by every mu-valid map.

    Grows ``[alpha, alpha]`` by the images under the maps until it stops
    moving, pads it slightly and checks closure; falls back to ``[-1, 1]``.
    """
    maps = [sys.maps[i] for i in sys.valid]
    lo = hi = float(alpha)
    for _ in range(max_iter):
        new_lo, new_hi = lo, hi
        for f in maps:
            a, b = image_interval(f, lo, hi)
            new_lo, new_hi = min(new_lo, a), max(new_hi, b)
        new_lo, new_hi = max(new_lo, -1.0), min(new_hi, 1.0)
        if new_lo >= lo - HULL_TOL and new_hi <= hi + HULL_TOL:
            lo, hi = new_lo, new_hi
            break
        lo, hi = new_lo, new_hi
    padded = (max(lo - HULL_PAD, -1.0), min(hi + HULL_PAD, 1.0))
    for f in maps:
        a, b = image_interval(f, *padded)
        if a < padded[0] or b > padded[1]:
            log.debug("hull [%g, %g] not closed; using [-1, 1]", *padded)
            return (-1.0, 1.0)
    return padded


def integrand_bound(sys: IfsSystem, hull: tuple[float, float]) -> float:
    """``max_k sup_{x in hull} |log |((1+x)/2, (1-x)/2) A_k|_1|`` over mu-valid k.

    The norm is affine in ``x``, so the supremum sits at an endpoint.
    """
    C = 0.0
    for k in sys.valid:
        (p, q), (r, s) = sys.matrices[k]
        for x in hull:
            norm = (1 + x) / 2 * (p + q) + (1 - x) / 2 * (r + s)
            if norm <= 0:
                raise UnboundedIntegrand(
                    f"log-norm of A_{k} is unbounded on the orbit hull [{hull[0]}, {hull[1]}]"
                )
            C = max(C, abs(math.log(norm)))
    return C


def _merge(points: np.ndarray, weights: np.ndarray, tol: float):
    keys = np.round(points / tol).astype(np.int64)
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    merged = np.bincount(inverse.ravel(), weights=weights, minlength=len(uniq))
    return points[first], merged


def propagate(
    sys: IfsSystem, j: int, alpha: float, config: DegenerateConfig = DegenerateConfig()
) -> Iterator[OrbitMeasure]:
    """Yield the orbit measure of word length 0, 1, 2, ... (words avoid ``j``)."""
    others = [i for i in sys.valid if i != j]
    shrink = math.fsum(sys.measure[i] for i in others)
    state = OrbitMeasure(np.array([float(alpha)]), np.array([1.0]))
    yield state
    while others:
        pts = [sys.maps[i](state.points) for i in others]
        wts = [state.weights * sys.measure[i] for i in others]
        points, weights = np.concatenate(pts), np.concatenate(wts)
        if config.merge:
            points, weights = _merge(points, weights, config.merge_tol)
        dropped_now = 0.0
        if config.prune_below > 0:
            keep = weights >= config.prune_below
            dropped_now = float(weights[~keep].sum())
            points, weights = points[keep], weights[keep]
        if config.level_budget > dropped_now and len(weights):
            order = np.argsort(weights, kind="stable")
            cum = np.cumsum(weights[order])
            n_drop = int(np.searchsorted(cum, config.level_budget - dropped_now, side="right"))
            if n_drop:
                dropped_now += float(cum[n_drop - 1])
                keep = np.sort(order[n_drop:])
                points, weights = points[keep], weights[keep]
        if config.max_atoms and len(weights) > config.max_atoms:
            order = np.argsort(weights, kind="stable")
            cut = len(weights) - config.max_atoms
            dropped_now += float(weights[order[:cut]].sum())
            keep = np.sort(order[cut:])
            points, weights = points[keep], weights[keep]
        state = OrbitMeasure(
            points,
            weights,
            level=state.level + 1,
            dropped_mass=state.dropped_mass * shrink + dropped_now,
            dropped_total=state.dropped_total + dropped_now,
        )
        yield state
        if len(points) == 0:
            return


def lyapunov_degenerate(
    sys: IfsSystem,
    j: Optional[int] = None,
    eps: float = 1e-6,
    config: DegenerateConfig = DegenerateConfig(),
    levels: Optional[int] = None,
) -> LyapunovResult:
    """Word-series value of the exponent with a rigorous truncation bound.

    Stops at the first level ``L`` with ``C (1 - p_j)^(L+1) + C * pruned <= eps``
    (or exactly at ``levels`` when given).
    """
    if j is None:
        consts = sys.constant_indices()
        if not consts:
            raise NotDegenerate("no mu-valid rank-one matrix")
        j = consts[0]
    f_j = sys.maps[j]
    if sys.measure[j] <= 0:
        raise NotDegenerate(f"index {j} is not mu-valid")
    if not isinstance(f_j, ConstantMap):
        raise NotDegenerate(f"map f_{j} is not constant")
    alpha = f_j.value
    p_j = sys.measure[j]
    shrink = 1.0 - p_j

    hull = orbit_hull(sys, alpha)
    C = integrand_bound(sys, hull)
    if levels is None and config.auto_budget and 0 < shrink < 1 and C > 0:
        # half of eps for the geometric tail, half spread evenly over the levels
        n_levels = max(1, math.ceil(math.log(eps / (2 * C)) / math.log(shrink)))
        config = replace(config, level_budget=eps / (2 * C * n_levels))

    terms = []
    tail = math.inf
    state = None
    for state in propagate(sys, j, alpha, config):
        if len(state):
            terms.append(p_j * math.fsum(state.weights * sys.integrand(state.points)))
        tail = C * shrink ** (state.level + 1)
        if levels is not None:
            if state.level >= levels:
                break
        elif tail + C * state.dropped_total <= eps or state.level >= config.max_levels:
            break
    assert state is not None
    if len(state) == 0:
        tail = 0.0
    bound = tail + C * state.dropped_total
    lam = math.fsum(terms)
    if levels is None and bound > eps:
        log.warning("degenerate series stopped at level %d with bound %.3g > eps", state.level, bound)
    return LyapunovResult.make(
        lam,
        sys.b,
        Method.DEGENERATE,
        bound,
        {
            "j": j,
            "alpha": alpha,
            "levels": state.level,
            "atoms": len(state),
            "hull": list(hull),
            "integrand_bound": C,
            "tail_bound": tail,
            "pruned_mass": state.dropped_total,
        },
    )
