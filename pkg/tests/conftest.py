import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (status, detail); filled by test_acceptance.py
CRITERIA: dict[int, tuple[str, str]] = {}


def report_criterion(number: int, status: str, detail: str) -> None:
    CRITERIA[number] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        status, detail = CRITERIA[number]
        terminalreporter.write_line(f"CRITERION {number}: {status} {detail}")
