import pytest

from dqkd import field_of_order
from dqkd.mub import build_mub

SMALL_DIMS = (2, 3, 4, 5, 7, 8, 9)


@pytest.fixture(scope="session")
def fields():
    cache = {}

    def get(d):
        if d not in cache:
            cache[d] = field_of_order(d)
        return cache[d]
    return get


@pytest.fixture(scope="session")
def tables(fields):
    cache = {}

    def get(d):
        if d not in cache:
            cache[d] = build_mub(fields(d))
        return cache[d]
    return get


# lines collected by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
