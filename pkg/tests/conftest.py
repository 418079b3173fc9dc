import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from floquet_well import ModelParams  # noqa: E402

# first zeros of J0 and J1
X1 = 2.404825557695773
Y1 = 3.8317059702075125


@pytest.fixture
def fig2_params():
    """eps0 = 2*omega, omega = 50, gamma = 0.5, keyed by interaction."""
    return {U: ModelParams(100.0, 50.0, 0.5, U) for U in (0, 2, 50, 52)}


# (criterion, check, passed, detail) rows collected by test_acceptance.py
ACCEPTANCE_LOG: list[tuple[str, str, bool, str]] = []


@pytest.fixture
def record():
    def _record(criterion: str, check: str, passed: bool, detail: str = ""):
        ACCEPTANCE_LOG.append((criterion, check, bool(passed), detail))
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, check, passed, detail in ACCEPTANCE_LOG:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion} {check}: {detail}")
