"""Shared pytest wiring for the acceptance suite.

Acceptance tests register one verdict line per criterion; the terminal
summary hook prints them as a block at the end of the run so the pass/fail
status of every criterion is visible in one place regardless of verbosity.
"""

_VERDICTS: list[str] = []


def record_verdict(line: str) -> None:
    _VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
