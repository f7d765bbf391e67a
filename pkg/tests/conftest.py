import pytest

CRITERIA = {}


def record(number: int, part: str, passed: bool, detail: str = ""):
    CRITERIA.setdefault(number, []).append((part, bool(passed), detail))


@pytest.fixture
def criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        parts = CRITERIA[number]
        ok = all(p for _, p, _ in parts)
        failed = [name for name, p, _ in parts if not p]
        tail = "" if ok else f" (failing: {', '.join(failed)})"
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}{tail}")
        for name, p, detail in parts:
            terminalreporter.write_line(f"    {'ok  ' if p else 'FAIL'} {name}: {detail}")
