import itertools
import math

import numpy as np
import pytest

from cantordim import lebesgue, lyapunov_degenerate
from cantordim.degenerate import DegenerateConfig, orbit_hull, propagate
from cantordim.digitsets import matrices_from_lists
from cantordim.errors import NotDegenerate, UnboundedIntegrand
from cantordim.measures import ProductMeasure
from cantordim.moebius import IfsSystem, log_norm

from conftest import b4_closed_form

B4_LAMBDA = 0.797435
B4_DIM = 0.575228


@pytest.fixture(scope="module")
def b4_runs(b4):
    return {j: lyapunov_degenerate(b4, j=j, eps=1e-4) for j in (0, 3)}


def test_base4_012(b4_runs):
    for res in b4_runs.values():
        assert res.error_bound <= 1e-4
        assert abs(res.lam - B4_LAMBDA) <= 1e-4
        assert abs(res.dimension - B4_DIM) <= 1e-4


def test_j_invariance(b4_runs):
    r0, r3 = b4_runs[0], b4_runs[3]
    assert abs(r0.lam - r3.lam) <= r0.error_bound + r3.error_bound


def test_default_j_is_smallest(b4):
    res = lyapunov_degenerate(b4, eps=1e-3)
    assert res.metadata["j"] == 0
    assert res.metadata["alpha"] == 1.0


def test_closed_form(b4):
    res = lyapunov_degenerate(b4, eps=1e-5)
    exact = b4_closed_form(60)
    assert abs(res.lam - exact) <= res.error_bound
    # twenty terms of the closed form are only good to a few parts in 1e6
    assert abs(b4_closed_form(20) - exact) < 1e-5
    assert abs(b4_closed_form(20) - B4_LAMBDA) < 1e-5


def test_refinement_within_bound(b4):
    coarse = lyapunov_degenerate(b4, j=3, eps=1e-4)
    fine = lyapunov_degenerate(b4, j=3, eps=1e-5)
    assert abs(coarse.lam - fine.lam) < coarse.error_bound
    longer = lyapunov_degenerate(b4, j=3, levels=coarse.metadata["levels"] + 5)
    assert abs(coarse.lam - longer.lam) < coarse.error_bound


@pytest.mark.parametrize("config", [
    DegenerateConfig(),
    DegenerateConfig(prune_below=1e-6),
    DegenerateConfig(level_budget=1e-5),
    DegenerateConfig(max_atoms=50),
])
def test_mass_conservation(b4, config):
    shrink = 0.75
    hull = orbit_hull(b4, -1.0)
    for state in propagate(b4, 3, -1.0, config):
        assert state.mass + state.dropped_mass == pytest.approx(shrink**state.level, abs=1e-12)
        if len(state):
            assert hull[0] <= state.points.min() and state.points.max() <= hull[1]
        if state.level >= 25:
            break


def brute_force_series(sys, j, alpha, L):
    # sum over explicit words of length <= L
    others = [i for i in sys.valid if i != j]
    p_j = sys.measure[j]
    total = 0.0
    for n in range(L + 1):
        for word in itertools.product(others, repeat=n):
            x, w = alpha, 1.0
            for i in word:
                x, w = sys.maps[i](x), w * sys.measure[i]
            total += p_j * w * sum(sys.measure[k] * float(log_norm(sys.matrices[k], x)) for k in sys.valid)
    return total


def test_merge_matches_enumeration(b4):
    L = 12
    exact = lyapunov_degenerate(b4, j=3, levels=L, config=DegenerateConfig(merge=False, max_atoms=0))
    merged = lyapunov_degenerate(b4, j=3, levels=L, config=DegenerateConfig(max_atoms=0))
    assert abs(exact.lam - merged.lam) <= 1e-12
    words = brute_force_series(b4, 3, -1.0, 7)
    short = lyapunov_degenerate(b4, j=3, levels=7, config=DegenerateConfig(merge=False))
    assert abs(words - short.lam) <= 1e-12


def test_all_same_constant():
    A = [[1, 2], [2, 4]]
    sys = IfsSystem(matrices_from_lists([A, A]), ProductMeasure((1.0, 0.0)))
    alpha = sys.maps[0].value
    res = lyapunov_degenerate(sys, eps=1e-12)
    assert res.metadata["levels"] == 0
    assert res.error_bound == 0.0
    assert res.lam == pytest.approx(float(log_norm(A, alpha)), abs=1e-15)


def test_all_same_constant_uniform():
    A = [[1, 2], [2, 4]]
    sys = IfsSystem(matrices_from_lists([A, A]), lebesgue(2))
    res = lyapunov_degenerate(sys, eps=1e-10)
    assert abs(res.lam - float(log_norm(A, sys.maps[0].value))) <= res.error_bound + 1e-15


def test_orbit_hull_examples(b4, seventh):
    assert orbit_hull(b4, -1.0) == (-1.0, 1.0)
    single = IfsSystem(matrices_from_lists([[[2, 3], [3, 2]], [[1, 2], [2, 4]]]), ProductMeasure((1.0, 0.0)))
    lo, hi = orbit_hull(single, 0.0)
    assert -0.2 <= lo <= 0.0 <= hi <= 0.2
    # f_0 fixes 1 and f_6 fixes -1, so orbits accumulate at both endpoints
    assert seventh.maps[0](1.0) == 1.0 and seventh.maps[6](-1.0) == -1.0
    assert orbit_hull(seventh, 0.0) == (-1.0, 1.0)
    for f in seventh.maps:
        a, b = f(-1.0), f(1.0)
        assert -1 <= min(a, b) and max(a, b) <= 1


def test_not_degenerate(seventh):
    with pytest.raises(NotDegenerate):
        lyapunov_degenerate(seventh)
    with pytest.raises(NotDegenerate):
        lyapunov_degenerate(seventh, j=2)


def test_unbounded_integrand():
    # f_0 is constant 1 and A_1 has a zero first row, so log|vA_1| blows up at x = 1
    sys = IfsSystem(matrices_from_lists([[[1, 0], [1, 0]], [[0, 0], [1, 1]]]), lebesgue(2))
    with pytest.raises(UnboundedIntegrand):
        lyapunov_degenerate(sys, j=0)


def test_bound_reported_when_eps_unreachable(b4):
    res = lyapunov_degenerate(b4, j=3, eps=1e-9, config=DegenerateConfig(max_atoms=1000))
    assert res.error_bound > 1e-9
    assert abs(res.lam - b4_closed_form(60)) <= res.error_bound
