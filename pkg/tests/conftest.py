import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def record_criterion():
    """Store a one-line acceptance verdict, printed in the terminal summary."""

    def record(number, title, value, tol, passed):
        mark = "PASS" if passed else "FAIL"
        line = f"[{mark}] criterion {number:>2}: {title}"
        if value is not None:
            line += f" (worst {value:.3e}, tol {tol:.0e})"
        ACCEPTANCE_LINES.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
