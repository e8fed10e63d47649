import numpy as np
import pytest

from wkfi.entropy import Scenario
from wkfi.spd import SpdMatrix, random_spd


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_scenario(rng, dim):
    return Scenario(random_spd(rng, dim), random_spd(rng, dim), rng.uniform())


@pytest.fixture
def d1_pair():
    """The one-dimensional mixture c1 = 1, c2 = 3 at equal weights."""
    return Scenario(SpdMatrix([[1.0]]), SpdMatrix([[3.0]]), 0.5)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
