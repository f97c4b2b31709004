import math
import os

import numpy as np
import pytest

from cantordim import dim_from_lambda, grid_stationary, lyapunov_neumann, mc_lyapunov
from cantordim.digitsets import matrices_from_lists
from cantordim.errors import ZeroProduct
from cantordim.measures import ProductMeasure, lebesgue
from cantordim.moebius import IfsSystem
from cantordim.oracle import BURN_IN

from conftest import PHI_B7PAIR, PHI_SEVENTH

SEVENTH_LAMBDA = 1.6363797884


def test_all_ones_gives_log2():
    tm = matrices_from_lists([[[1, 1], [1, 1]]] * 3)
    est, se = mc_lyapunov(tm, lebesgue(3), steps=10_000, trials=3, seed=1)
    assert est == pytest.approx(math.log(2), abs=1e-12)
    assert se <= 1e-12


def test_seventh_within_three_se(seventh):
    est, se = mc_lyapunov(seventh.matrices, seventh.measure, steps=10**6, trials=20, seed=0)
    assert abs(est - SEVENTH_LAMBDA) <= 3 * se


def test_scale_consistency(seventh):
    base, _ = mc_lyapunov(seventh.matrices, seventh.measure, steps=20_000, trials=4, seed=3)
    for c in (0.5, 3.0, 1e3):
        scaled, _ = mc_lyapunov(seventh.matrices, seventh.measure, steps=20_000, trials=4, seed=3, scale=c)
        assert scaled - base == pytest.approx(math.log(c), abs=1e-12)


def test_reproducible(seventh, monkeypatch):
    runs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("CANTORDIM_THREADS", threads)
        runs.append(mc_lyapunov(seventh.matrices, seventh.measure, steps=20_000, trials=5, seed=11))
    runs.append(mc_lyapunov(seventh.matrices, seventh.measure, steps=20_000, trials=5, seed=11))
    assert runs[0] == runs[1] == runs[2]
    other = mc_lyapunov(seventh.matrices, seventh.measure, steps=20_000, trials=5, seed=12)
    assert other != runs[0]


def test_zero_product():
    tm = matrices_from_lists([[[0, 1], [0, 0]], [[1, 0], [0, 1]]])
    with pytest.raises(ZeroProduct):
        mc_lyapunov(tm, ProductMeasure((1.0, 0.0)), steps=10_000, trials=2)


def test_argument_checks(seventh):
    with pytest.raises(ValueError):
        mc_lyapunov(seventh.matrices, seventh.measure, steps=100, trials=5)
    with pytest.raises(ValueError):
        mc_lyapunov(seventh.matrices, seventh.measure, steps=10_000, trials=1)


def test_middle_third_bias_matches_theory(third):
    # Products are monomial, so both exponents equal log(2)/3 and |vP_n| follows the larger of two
    # coupled random walks. Their log-difference D moves by +-log 2 with probability 1/3 each, and
    # the estimate exceeds log(2)/3 by about (E|D_{n+K}| - E|D_K|) / (2n).
    n = 100_000
    est, se = mc_lyapunov(third.matrices, third.measure, steps=n, trials=40, seed=0)

    def mean_abs_d(m):
        return math.log(2) * math.sqrt(2 * m * (2 / 3) / math.pi)

    bias = (mean_abs_d(n + BURN_IN) - mean_abs_d(BURN_IN)) / (2 * n)
    assert abs(est - math.log(2) / 3 - bias) <= 4 * se
    assert bias > 4 * se


def test_grid_base7_pair(b7pair):
    g = grid_stationary(b7pair, cells=10_000, iters=200)
    assert g.total == pytest.approx(1.0, abs=1e-12)
    assert abs(g.integrate(PHI_B7PAIR) - 9 / 32) <= 1e-3


def test_grid_constant_map():
    sys = IfsSystem(matrices_from_lists([[[1, 2], [2, 4]], [[1, 0], [0, 1]]]), ProductMeasure((1.0, 0.0)))
    alpha = sys.maps[0].value
    g = grid_stationary(sys, cells=100, iters=1)
    cell = int(np.searchsorted(g.edges, alpha)) - 1
    assert g.masses[cell] == pytest.approx(1.0, abs=1e-12)
    assert g.total == pytest.approx(1.0, abs=1e-12)


def test_grid_seventh_integrand(seventh):
    lam = lyapunov_neumann(seventh, PHI_SEVENTH, 1e-10).lam
    g = grid_stationary(seventh, cells=10_000, iters=200)
    assert abs(g.integrate(seventh.integrand) - lam) <= 5e-3


@pytest.mark.parametrize("fixture", ["seventh", "b4", "b7pair", "nine"])
def test_grid_mass_conservation(fixture, request):
    sys = request.getfixturevalue(fixture)
    for iters in range(1, 6):
        assert grid_stationary(sys, cells=500, iters=iters).total == pytest.approx(1.0, abs=1e-12 * iters)


def test_grid_rejects_few_cells(seventh):
    with pytest.raises(ValueError):
        grid_stationary(seventh, cells=50)


def test_dim_from_lambda():
    assert dim_from_lambda(1.6363797884, 7) == pytest.approx(0.8409328607, abs=1e-10)
    assert dim_from_lambda(0.0, 5) == 0.0
    assert dim_from_lambda(0.693147, 7) == pytest.approx(0.356207, abs=1e-6)
    with pytest.raises(ValueError):
        dim_from_lambda(1.0, 1)
