import numpy as np
import pytest

from dckp.instance import Instance

T5_PROFITS = [6, 5, 8, 4, 7]
T5_WEIGHTS = [5, 4, 6, 3, 5]
T5_EDGES = [(1, 2), (3, 4)]


@pytest.fixture
def t5():
    return Instance(T5_PROFITS, T5_WEIGHTS, 10, T5_EDGES, name="T5")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
CRITERIA: dict[int, str] = {}


def record_criterion(number: int, passed: bool | None, detail: str) -> str:
    """``passed=None`` marks a criterion that could not be evaluated."""
    status = "UNAVAILABLE" if passed is None else "PASS" if passed else "FAIL"
    line = f"criterion {number}: {status} ({detail})"
    CRITERIA[number] = line
    print(line, flush=True)
    return line


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
