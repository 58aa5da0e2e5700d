import numpy as np
import pytest

from polyschwarz.maps import catalog


@pytest.fixture(scope="session")
def cat2():
    return catalog(2, seed=0)


@pytest.fixture(scope="session")
def cat3():
    return catalog(3, seed=1)


def random_points(rng, count, n, radius=0.8):
    mods = rng.uniform(0, radius, (count, n))
    return mods * np.exp(2j * np.pi * rng.uniform(size=(count, n)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
