"""Collects the one-line verdicts of the acceptance criteria for the run summary."""

ACCEPTANCE_LINES: list = []


def record_criterion(number: int, passed: bool, text: str) -> str:
    line = f"CRITERION {number} {'PASS' if passed else 'FAIL'}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
