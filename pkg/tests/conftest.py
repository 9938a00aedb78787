import functools

import numpy as np
import pytest

from apfppc import preset
from apfppc.sim import run

# Acceptance lines collected by tests/test_acceptance.py and echoed at the end
# of the session so they are visible without ``-s``.
ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def scenario_run(name, ppc=True):
    cfg = preset(name)
    if not ppc:
        cfg = cfg.without_ppc()
    return run(cfg)


@pytest.fixture(scope="session")
def two_cone_run():
    return scenario_run("two-cone")


@pytest.fixture(scope="session")
def three_cone_run():
    return scenario_run("three-cone")


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
