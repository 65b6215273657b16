import numpy as np
import pytest

from fadesim.model import SensingModel

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def scalar_model():
    return SensingModel([[[1.0]], [[2.0]]])


@pytest.fixture
def mixed_model():
    """Three agents with different measurement sizes, jointly observable in R^3."""
    return SensingModel([
        [[1.0, 0.5, 0.0]],
        [[0.0, 1.0, -1.0], [2.0, 0.0, 1.0]],
        [[0.3, -0.2, 1.0], [1.0, 1.0, 1.0], [0.0, 0.0, 0.5]],
    ])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
