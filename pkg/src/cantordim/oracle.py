"""Independent estimators used to cross-check the exact methods."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from .digitsets import TransferMatrices
from .errors import ZeroProduct
from .measures import ProductMeasure
from .moebius import ConstantMap, IfsSystem
from .result import LyapunovResult, Method, dim_from_lambda

__all__ = ["mc_lyapunov", "mc_result", "grid_stationary", "GridMeasure", "dim_from_lambda"]

MIN_STEPS = 10_000
# steps run before accumulation starts, so the direction is close to stationary
BURN_IN = 1_000


def thread_cap() -> int:
    env = os.environ.get("CANTORDIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@njit(cache=True, nogil=True)
def _run_trial(mats, digits, burn_in):
    # row vector kept at unit l1 norm; returns (sum of log growth, ok flag)
    v0, v1 = 0.5, 0.5
    acc = 0.0
    comp = 0.0  # Kahan compensation
    for t in range(digits.shape[0]):
        m = mats[digits[t]]
        w0 = v0 * m[0, 0] + v1 * m[1, 0]
        w1 = v0 * m[0, 1] + v1 * m[1, 1]
        s = w0 + w1
        if s <= 0.0:
            return acc, False
        if t >= burn_in:
            y = math.log(s) - comp
            nxt = acc + y
            comp = (nxt - acc) - y
            acc = nxt
        v0 = w0 / s
        v1 = w1 / s
    return acc, True


def _trial_seeds(seed: int, trials: int):
    return np.random.SeedSequence(seed).spawn(trials)


def mc_lyapunov(
    tm: TransferMatrices,
    measure: ProductMeasure,
    steps: int = 1_000_000,
    trials: int = 20,
    seed: int = 0,
    scale: float = 1.0,
    burn_in: int = BURN_IN,
) -> tuple[float, float]:
    """Furstenberg-Kesten estimate: mean and standard error over independent trials.

    Each trial draws i.i.d. digits (Philox stream derived from ``seed``),
    multiplies the row vector (1/2, 1/2) from the right and renormalises every
    step.  The first ``burn_in`` growth factors are discarded: once the
    direction is distributed like the stationary measure every step has mean
    exactly lambda, which removes the O(1/steps) bias of the start vector.
    ``scale`` multiplies every matrix (used for bookkeeping checks).
    """
    if steps < MIN_STEPS:
        raise ValueError(f"steps must be >= {MIN_STEPS}, got {steps}")
    if trials < 2:
        raise ValueError("need at least two trials for a standard error")
    mats = np.ascontiguousarray(tm.array * scale)
    probs = np.array(measure.probs)
    seeds = _trial_seeds(seed, trials)

    def run(ss) -> float:
        rng = np.random.Generator(np.random.Philox(ss))
        digits = rng.choice(len(probs), size=steps + burn_in, p=probs).astype(np.int64)
        acc, ok = _run_trial(mats, digits, burn_in)
        if not ok:
            raise ZeroProduct("the random product became the zero matrix")
        return acc / steps

    workers = min(thread_cap(), trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            estimates = list(pool.map(run, seeds))
    else:
        estimates = [run(ss) for ss in seeds]
    est = np.array(estimates)
    return float(est.mean()), float(est.std(ddof=1) / math.sqrt(trials))


def mc_result(sys: IfsSystem, steps: int = 1_000_000, trials: int = 20, seed: int = 0) -> LyapunovResult:
    mean, se = mc_lyapunov(sys.matrices, sys.measure, steps, trials, seed)
    return LyapunovResult.make(
        mean, sys.b, Method.MONTE_CARLO, 3 * se,
        {"steps": steps, "trials": trials, "seed": seed, "burn_in": BURN_IN, "standard_error": se},
    )


@dataclass(frozen=True)
class GridMeasure:
    """Piecewise-constant density on a uniform partition of [-1, 1]."""

    edges: np.ndarray
    masses: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def integrate(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        """Midpoint-rule integral of ``g``."""
        return float(np.dot(self.masses, g(self.centers)))

    @property
    def total(self) -> float:
        return float(self.masses.sum())


def _push(f, edges: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    """CDF of the pushforward of a piecewise-uniform measure, at ``edges``."""
    if isinstance(f, ConstantMap):
        return np.where(edges >= f.value, cdf[-1], 0.0)
    img = np.clip(f(edges), -1.0, 1.0)
    if img[-1] >= img[0]:
        return np.interp(edges, img, cdf, left=0.0, right=cdf[-1])
    # decreasing map: mass of {x : f(x) <= y} = mass of {x >= f^-1(y)}
    upper = cdf[-1] - cdf
    return np.interp(edges, img[::-1], upper[::-1], left=0.0, right=cdf[-1])


def grid_stationary(sys: IfsSystem, cells: int = 10_000, iters: int = 200) -> GridMeasure:
    """Approximate stationary measure by iterating ``nu -> sum_i p_i (f_i)_* nu``.

    Mass inside a cell is spread uniformly over the cell's image, so each
    step conserves total mass.
    """
    if cells < 100:
        raise ValueError("cells must be >= 100")
    edges = np.linspace(-1.0, 1.0, cells + 1)
    masses = np.full(cells, 1.0 / cells)
    maps = [(sys.measure[i], sys.maps[i]) for i in sys.valid]
    for _ in range(iters):
        cdf = np.concatenate(([0.0], np.cumsum(masses)))
        cdf[-1] = 1.0 if abs(cdf[-1] - 1.0) < 1e-9 else cdf[-1]
        new_cdf = np.zeros(cells + 1)
        for p, f in maps:
            new_cdf += p * _push(f, edges, cdf)
        new = np.diff(new_cdf)
        # the lowest cell also collects any atom sitting exactly at -1
        new[0] += new_cdf[0]
        masses = new
    return GridMeasure(edges, masses)
