from __future__ import annotations

import pytest
from hypothesis import settings

from modlie import load_bundled

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sl2():
    return load_bundled("sl2")


@pytest.fixture(scope="session")
def sl3():
    return load_bundled("sl3")


@pytest.fixture(scope="session")
def h3():
    return load_bundled("heis3")


@pytest.fixture(scope="session")
def b2():
    return load_bundled("b2")


@pytest.fixture(scope="session")
def abelian3():
    return load_bundled("abelian3")


CRITERIA: list[tuple[int, str, str, float]] = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, status, elapsed in sorted(CRITERIA):
        terminalreporter.write_line(f"criterion {n:2d}: {status} ({elapsed:.2f}s) {title}")
