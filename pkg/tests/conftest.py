import acceptance_log


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(acceptance_log.LINES):
            terminalreporter.write_line(acceptance_log.LINES[k])
