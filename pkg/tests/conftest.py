import math

import pytest

from cantordim import DigitPair, IfsSystem, MoebiusMap, ProductMeasure, lebesgue

FULL7 = (0, 1, 2, 4, 5, 6)

PHI_SEVENTH = MoebiusMap(7, 4, 4, 16)
PHI0_SEVENTH = MoebiusMap(0.3769, -0.2768, -0.1973, 1)
PHI_NINE = MoebiusMap(-0.3914, -0.055, -0.0639, 1)
PHI_B7PAIR = MoebiusMap(6, 1, -4, 12)


def seventh_system() -> IfsSystem:
    return IfsSystem.from_pair(DigitPair(7, FULL7, FULL7), lebesgue(7))


def nine_system() -> IfsSystem:
    return IfsSystem.from_pair(DigitPair(9, (0, 1, 4, 5, 7, 8), (0, 2, 3, 5, 6, 8)), lebesgue(9))


def b4_system() -> IfsSystem:
    return IfsSystem.from_pair(DigitPair(4, (0, 1, 2), (0, 1, 2)), lebesgue(4))


def b7pair_system() -> IfsSystem:
    mu = ProductMeasure((0, 0.5, 0, 0.5, 0, 0, 0))
    return IfsSystem.from_pair(DigitPair(7, (0, 2, 5), (0, 1, 2, 4, 6)), mu)


def third_system() -> IfsSystem:
    return IfsSystem.from_pair(DigitPair(3, (0, 2), (0, 2)), lebesgue(3))


def b4_closed_form(k_max: int) -> float:
    total = math.log(2 / 3) / 6
    for k in range(k_max + 1):
        total += 4.0 ** -(k + 1) * (math.lgamma(3 * 2**k + 1) - math.lgamma(2 ** (k + 1) + 1))
    return total


@pytest.fixture(scope="session")
def seventh():
    return seventh_system()


@pytest.fixture(scope="session")
def nine():
    return nine_system()


@pytest.fixture(scope="session")
def b4():
    return b4_system()


@pytest.fixture(scope="session")
def b7pair():
    return b7pair_system()


@pytest.fixture(scope="session")
def third():
    return third_system()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
