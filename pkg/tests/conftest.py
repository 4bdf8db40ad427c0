import numpy as np
import pytest
from hypothesis import settings

from tspdiv.algorithms import warmup
from tspdiv.tsplib_io import Instance, load_instance

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture(scope="session", autouse=True)
def _compiled():
    warmup()


@pytest.fixture(scope="session")
def berlin52() -> Instance:
    return load_instance("berlin52")


@pytest.fixture(scope="session")
def eil51() -> Instance:
    return load_instance("eil51")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit_square() -> Instance:
    return Instance("square", np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))


@pytest.fixture(scope="session")
def square10() -> Instance:
    return Instance("square10", np.array([[0, 0], [10, 0], [10, 10], [0, 10]], dtype=float))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
