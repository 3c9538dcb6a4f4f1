import numpy as np
import pytest
from hypothesis import settings

from bctrack import scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def numerical():
    return scenario.load_preset("numerical")


@pytest.fixture(scope="session")
def vehicle():
    return scenario.load_preset("vehicle")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
