import math

import numpy as np
import pytest

from gasvalve.state_space import GasParams, State

ACCEPTANCE_LINES: list[str] = []


def random_state(rng: np.random.Generator, g: GasParams, nu_max: float = 3.0) -> State:
    """Density log-uniform on [0.1, 10], Mach number uniform on [-nu_max, nu_max]."""
    mu = rng.uniform(math.log(0.1), math.log(10.0))
    nu = rng.uniform(-nu_max, nu_max)
    return State.from_mu_nu(mu, nu, g)


@pytest.fixture
def g() -> GasParams:
    return GasParams(1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
