import os

import pytest
from hypothesis import HealthCheck, settings

from saelab.actions import DIRICHLET, LAPLACIAN, PERIODIC, FormalAction
from saelab.geometry import Interval, TruncatedLine
from saelab.grid import make_grid
from saelab.operators import assemble
from saelab.spectral import eigendecompose
from saelab.witness import polynomial

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("stress", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def dirichlet_2000():
    return eigendecompose(assemble(LAPLACIAN, DIRICHLET, make_grid(Interval(0.0, 1.0), 2000)))


@pytest.fixture(scope="session")
def periodic_2000():
    return eigendecompose(assemble(LAPLACIAN, PERIODIC, make_grid(Interval(0.0, 1.0), 2000)))


@pytest.fixture(scope="session")
def oscillator_2400():
    H = FormalAction.schrodinger(polynomial([0, 0, 1], label="x^2"))
    return eigendecompose(assemble(H, DIRICHLET, make_grid(TruncatedLine(12.0), 2400)))
