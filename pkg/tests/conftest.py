import numpy as np
import pytest

from safescout.environment import (TABLE1_FINAL_ESTIMATES, TABLE1_TRUE_P,
                                   table1_environment)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def table1_env():
    return table1_environment()


@pytest.fixture
def table1_true_p():
    return np.array(TABLE1_TRUE_P)


@pytest.fixture
def table1_final():
    return np.array(TABLE1_FINAL_ESTIMATES)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
