import pytest

# (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line, then assert."""

    def record(label, ok, detail=""):
        ACCEPTANCE.append((label, bool(ok), detail))
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
