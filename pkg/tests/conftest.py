import numpy as np
import pytest

from tomonet.measurement import random_srm
from tomonet.qcore import gell_mann_basis


@pytest.fixture(scope="session")
def basis2():
    return gell_mann_basis(2)


@pytest.fixture(scope="session")
def basis3():
    return gell_mann_basis(3)


@pytest.fixture(scope="session")
def srm2():
    return random_srm(2, np.random.default_rng(7))


@pytest.fixture(scope="session")
def srm3():
    return random_srm(3, np.random.default_rng(7))


# Criterion outcomes collected by tests/test_acceptance.py; printed after the
# run so the verdict lines survive pytest's output capture.
acceptance_results = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_results:
        return
    terminalreporter.write_line("")
    for name, status in acceptance_results.items():
        terminalreporter.write_line(f"[acceptance] {name}: {status}")
