import pytest

# one line per acceptance criterion, echoed in the terminal summary
CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA):
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(number: int, passed, detail: str) -> None:
        status = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        CRITERIA.append(f"criterion {number}: {status}  {detail}")
    return record
