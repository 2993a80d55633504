import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import pytest

from jqnn.pipeline import run_experiment


@pytest.fixture(scope="session")
def fig1_curve():
    return run_experiment("fig1", range(1, 21), range(0, 6))


@pytest.fixture(scope="session")
def fig2_curve():
    return run_experiment("fig2", range(1, 21), range(0, 6))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line; the lines are repeated in the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
