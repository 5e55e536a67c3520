import numpy as np
import pytest

from fracwalk import ml_model

# one PASS/FAIL line per acceptance criterion, echoed after the test run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)

H3 = np.array([[0.0, 0.6, 0.4], [0.3, 0.0, 0.7], [0.5, 0.5, 0.0]])
RATES3 = np.array([1.0, 2.0, 0.5])
ALPHAS3 = np.array([0.5, 0.7, 0.9])


@pytest.fixture(scope="session")
def model3():
    """Three-state heterogeneous Mittag-Leffler test model."""
    return ml_model(H3, RATES3, ALPHAS3)


@pytest.fixture(scope="session")
def model3_markov():
    """Same chain with exponential (alpha = 1) holding laws."""
    return ml_model(H3, RATES3, np.ones(3))
