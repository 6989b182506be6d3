from __future__ import annotations

import time

import pytest

from phaselab.catalogue import catalogue, sweep_universe
from phaselab.fixtures import load_fixture


@pytest.fixture(scope="session")
def fx():
    """Shipped reference phases by name."""
    return {name: load_fixture(name) for name in ("t1", "max3", "pair4", "sep4", "pair4_ordered")}


@pytest.fixture(scope="session")
def cat3():
    return catalogue(3)


@pytest.fixture(scope="session")
def cat2():
    return catalogue(2)


@pytest.fixture(scope="session")
def universe():
    return sweep_universe()


SESSION_START = time.monotonic()
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def pytest_collection_modifyitems(items):
    # acceptance last, so its timing check sees the rest of the suite
    items.sort(key=lambda item: item.module.__name__ == "test_acceptance")
