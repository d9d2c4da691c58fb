"""Shared pytest glue for the acceptance suite.

Collects one human-readable line per acceptance criterion and replays
them in the terminal summary, so a bare ``pytest -v`` always ends with
an explicit pass/fail ledger regardless of how verbose the run was.
"""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion():
    """Callable that records (and echoes) one acceptance result line."""

    def report(line):
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
