import os

import pytest

from bulkuniv.orthopoly import Potential, recurrence_table

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("bulkuniv_cache")
    os.environ["BULKUNIV_CACHE"] = str(d)
    return d


@pytest.fixture(scope="session")
def quartic(cache_dir):
    """V = x^4 at 256 bits, Jmax = 64."""
    return recurrence_table(Potential.parse("k4=1"), 64, precision_bits=256, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def gaussian(cache_dir):
    """V = x^2 at 256 bits, Jmax = 64."""
    return recurrence_table(Potential.parse("k2=1"), 64, precision_bits=256, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
