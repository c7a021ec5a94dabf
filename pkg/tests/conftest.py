"""Shared pytest hooks: the acceptance tests register one result line
per numbered criterion and the lines are echoed as a terminal summary
section, so they survive output capture."""

CRITERION_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)
