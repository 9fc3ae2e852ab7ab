from __future__ import annotations

import sys

import pytest

from twi.invariants import InvariantEngine


@pytest.fixture(scope="session")
def engine() -> InvariantEngine:
    return InvariantEngine()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
