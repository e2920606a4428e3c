import numpy as np
import pytest

from lpskew.process import InnovationSpec, LinearProcessSpec

ACCEPTANCE_LINES = []


@pytest.fixture
def exp1():
    return InnovationSpec.exponential(1.0)


@pytest.fixture
def arma11(exp1):
    return LinearProcessSpec(ar=(0.5,), ma=(0.5,), innovation=exp1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
