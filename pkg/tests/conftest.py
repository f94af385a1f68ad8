import acceptance_report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_report.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in acceptance_report.RESULTS:
        verdict = "PASS" if passed else "FAIL"
        line = f"{verdict} {criterion}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
