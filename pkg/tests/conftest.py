"""Collects one verdict line per acceptance criterion and prints them at the end."""

import pytest

_VERDICTS = {}


@pytest.fixture
def verdict():
    def record(number, ok, detail):
        _VERDICTS[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
