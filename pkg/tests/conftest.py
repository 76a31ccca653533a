import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "property: invariant / property-based suites")
    config.addinivalue_line("markers", "acceptance: acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def record_acceptance():
    def _record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    return _record
