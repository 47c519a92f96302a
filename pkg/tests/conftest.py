import pytest

_ACCEPTANCE = {}


@pytest.fixture
def record():
    """Record one acceptance criterion outcome; returns ``ok`` unchanged."""

    def _record(num: int, ok: bool, detail: str) -> bool:
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} | {detail}"
        _ACCEPTANCE[num] = line
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[num])
