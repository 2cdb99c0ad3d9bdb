import random

import pytest
from hypothesis import HealthCheck, settings

from affable.fixtures import branch_collapse, loop_then_chain, odometer, two_branch_tree

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def odo2():
    return odometer(6)


@pytest.fixture
def tree2():
    return two_branch_tree(4)


@pytest.fixture
def loop1():
    return loop_then_chain(4)


@pytest.fixture
def q2():
    return branch_collapse(4)


@pytest.fixture
def rng():
    return random.Random(20240)
