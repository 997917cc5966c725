"""Shared test plumbing: the acceptance-criteria summary block.

test_acceptance.py appends one "[PASS]/[FAIL] criterion NN: ..." line per
criterion; the hook prints them after the run regardless of capture mode.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
