import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def demo_dir():
    return ROOT / "demos" / "scenarios"


@pytest.fixture
def python_exe():
    return sys.executable


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion's outcome for the terminal summary."""

    def record(number, title, ok, detail=""):
        prev = ACCEPTANCE.get(number)
        ok = ok and (prev is None or prev[1])
        detail = detail if prev is None else f"{prev[2]}; {detail}"
        ACCEPTANCE[number] = (title, ok, detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
