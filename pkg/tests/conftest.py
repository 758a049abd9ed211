import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_LINES = {}


@pytest.fixture
def criterion():
    """``criterion(n, passed, detail)`` records one acceptance line."""

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        _LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_LINES):
        terminalreporter.write_line(_LINES[number])
