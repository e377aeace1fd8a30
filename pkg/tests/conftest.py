import numpy as np
import pytest

from mdplab import kernels
from mdplab.mdp import Mdp


def make_toy2(gamma=0.5):
    """State 0: action 0 self-loops at cost 1.5, action 1 moves to state 1 free.
    State 1: both actions self-loop at cost 2."""
    P = np.zeros((2, 2, 2))
    P[0, 0, 0] = 1.0
    P[0, 1, 1] = 1.0
    P[1, :, 1] = 1.0
    C = np.array([[1.5, 0.0], [2.0, 2.0]])
    return Mdp(P, C, gamma)


@pytest.fixture
def toy2():
    return make_toy2()


@pytest.fixture
def zero_cost():
    rng = np.random.default_rng(7)
    P = rng.random((3, 2, 3))
    P /= P.sum(axis=2, keepdims=True)
    return Mdp(P, np.zeros((3, 2)), 0.8)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
