import numpy as np
import pytest

from avgflux.closedform import evaluate_W
from avgflux.mesh import build_graded
from avgflux.volterra1d import ProblemSpec1D, solve_flux


@pytest.fixture(scope="session")
def linear_reference():
    """Series values of W for h0 = 1 keyed by lambda, with a cache."""
    cache = {}

    def get(lam, t):
        key = (lam, tuple(np.round(np.atleast_1d(t), 15)))
        if key not in cache:
            cache[key] = evaluate_W(1, lam, t)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def flux_unit_256():
    mesh = build_graded(1.0, 256)
    return solve_flux(ProblemSpec1D.linear(1.0, 1.0), mesh)


@pytest.fixture(scope="session")
def flux_unit_1024():
    mesh = build_graded(1.0, 1024)
    return solve_flux(ProblemSpec1D.linear(1.0, 1.0), mesh)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """Record the PASS/FAIL line of one acceptance criterion."""

    def record(number: int, passed: bool, text: str) -> None:
        ACCEPTANCE_LINES[number] = f"{'PASS' if passed else 'FAIL'} criterion {number}: {text}"
        print(ACCEPTANCE_LINES[number])

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
