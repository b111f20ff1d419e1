import numpy as np
import pytest

from cvquotient.states import SqueezerSpec

ACCEPTANCE_LINES = []


@pytest.fixture
def pure_spec():
    return SqueezerSpec(0.1, 0.0)


@pytest.fixture
def noisy_spec():
    return SqueezerSpec(0.1, 10.0)


def tmsv(mu):
    """Two-mode squeezed vacuum with quadrature variance ``mu``."""
    c = np.sqrt(mu**2 - 1.0)
    z = np.diag([1.0, -1.0])
    return np.block([[mu * np.eye(2), c * z], [c * z, mu * np.eye(2)]])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
