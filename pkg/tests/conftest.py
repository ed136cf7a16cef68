import numpy as np
import pytest

from secure_rsma.bitframe import BitFramePlan


@pytest.fixture
def reference_plan():
    return BitFramePlan(100, 25, 50, 25, 25)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, whatever the capture mode."""
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::" in rep.nodeid:
                rows.append((rep.nodeid.split("::")[-1], "PASS" if outcome == "passed" else "FAIL"))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(rows):
            terminalreporter.write_line(f"{verdict}  {name}")
