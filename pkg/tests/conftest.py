import numpy as np
import pytest

from decolab.core import make_oscillator_spec


@pytest.fixture
def weak_spec():
    """Gamma >> Omega >> gamma, high temperature."""
    return make_oscillator_spec(M=1.0, Omega=1.0, gamma=1e-3, Gamma=1e3, T=100.0, a=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


#: Lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
