import pytest

# Lines reported by the acceptance module, echoed after the test summary.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
