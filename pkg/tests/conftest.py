import numpy as np
import pytest

from movfd.mesh import QuadMesh


def random_mesh(rng, P, T, dim=2, integer=False):
    if integer:
        return QuadMesh(rng.integers(-5, 6, size=(T + 1, P + 1, dim)).astype(float))
    return QuadMesh(rng.normal(size=(T + 1, P + 1, dim)))


def random_pair(rng, pmax=4, tmax=3, dim=2, same_p=False, tmin=0):
    T = int(rng.integers(tmin, tmax + 1))
    P = int(rng.integers(1, pmax + 1))
    Q = P if same_p else int(rng.integers(1, pmax + 1))
    return random_mesh(rng, P, T, dim), random_mesh(rng, Q, T, dim)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
