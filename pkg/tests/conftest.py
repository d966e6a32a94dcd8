import random

import pytest
from hypothesis import settings

# hypothesis runs derandomized so two runs of the suite see the same examples
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

ACCEPTANCE_LINES = []


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=2018, help="seed for the hand-rolled random generators")


@pytest.fixture
def seed(request) -> int:
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed) -> random.Random:
    return random.Random(seed)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
