import numpy as np
import pytest

from mpov import make_grid

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid1024():
    return make_grid(1024, 1024, 4e-6)


@pytest.fixture(scope="session")
def grid256():
    return make_grid(256, 256, 4e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
