import numpy as np
import pytest

from ieqpdmm.oracle import solve_active_set
from ieqpdmm.scenarios import gen_toy

TOY_SEED = 0


@pytest.fixture
def toy():
    return gen_toy(TOY_SEED)


@pytest.fixture
def toy_optimum(toy):
    return solve_active_set(toy)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, echoed in the terminal summary."""

    def record(number, ok, detail):
        label = "INFO" if ok is None else "PASS" if ok else "FAIL"
        line = f"{label} criterion {number}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
