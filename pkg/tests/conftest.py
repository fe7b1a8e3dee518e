import pytest

from triplelink.curves import borromean_standard
from triplelink.tubes import borromean_tubes


@pytest.fixture(scope="session")
def borromean():
    return borromean_standard()


@pytest.fixture(scope="session")
def btubes():
    return borromean_tubes()


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
