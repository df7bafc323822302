"""Pytest hooks: print the acceptance criteria verdict lines last."""

from __future__ import annotations

import helpers


def pytest_terminal_summary(terminalreporter):
    if not helpers.ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in helpers.ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
