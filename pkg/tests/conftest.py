import math

import pytest

from cplifs import systems

LOG2_LOG3 = math.log(2) / math.log(3)


@pytest.fixture
def cantor():
    return systems.cantor()


@pytest.fixture
def full():
    return systems.full_interval()


@pytest.fixture
def broken():
    return systems.broken_zero()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
