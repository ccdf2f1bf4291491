import acceptance_runs


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_runs.SUMMARY
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
