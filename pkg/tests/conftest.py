import numpy as np
import pytest
from hypothesis import settings

from cavity_sse.model import Grid, SimParams, WaveFunction

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def grid32():
    return Grid(32, 0.25)


def random_state(grid, rng, smooth=None):
    """Normalized random state; ``smooth`` keeps only |m| < smooth momentum modes."""
    c = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    if smooth is not None:
        c[np.abs(grid.m) >= smooth] = 0
        return WaveFunction(grid, np.fft.ifft(c)).normalized()
    return WaveFunction(grid, c).normalized()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def paper_params():
    return SimParams()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
