import pytest

from cantordim import nac_report, search_phi
from cantordim.digitsets import toothless_matrices
from cantordim.errors import DegenerateMap
from cantordim.measures import lebesgue
from cantordim.moebius import IfsSystem
from cantordim.neumann import NAC_MARGIN
from cantordim.phisearch import start_points

from conftest import PHI_NINE, PHI_SEVENTH


def assert_admissible(sys, found):
    assert found is not None
    report = nac_report(sys, found.phi, margin=NAC_MARGIN)
    assert report.passed
    assert found.phi.pole_outside(-1.05, 1.05)
    assert found.phi.sup_abs() < 0.99


def test_seventh(seventh):
    assert nac_report(seventh, PHI_SEVENTH).passed
    assert_admissible(seventh, search_phi(seventh))


def test_nine(nine):
    assert nac_report(nine, PHI_NINE).passed
    assert_admissible(nine, search_phi(nine))


def test_budget_exhausted(third):
    assert search_phi(third, budget=10) is None


def test_budget_respected(seventh):
    found = search_phi(seventh, budget=500)
    if found is not None:
        assert found.evaluations <= 500


def test_deterministic(seventh):
    a = search_phi(seventh, budget=5000, seed=4)
    b = search_phi(seventh, budget=5000, seed=4)
    assert a == b


def test_start_grid_seeded():
    assert start_points(1) == start_points(1)
    assert start_points(1) != start_points(2)


def test_rejects_constant_maps(b4):
    with pytest.raises(DegenerateMap):
        search_phi(b4)


def test_all_toothless_pairs_up_to_21():
    failures = []
    for b in range(7, 22):
        for tau in range(1, b - 1):
            sys = IfsSystem(toothless_matrices(b, tau), lebesgue(b))
            found = search_phi(sys)
            if found is None or not nac_report(sys, found.phi).passed:
                failures.append((b, tau))
    assert failures == []
