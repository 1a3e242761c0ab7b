import sys

import pytest

from khessian.exponents import Params
from khessian.solver import SolveOptions, solve_ivp


@pytest.fixture(scope="session")
def profile_952_r1e4():
    return solve_ivp(Params(9, 2, 5.0), 1.0, SolveOptions(r_max=1e4))


@pytest.fixture(scope="session")
def profile_2024_r1e4():
    return solve_ivp(Params(20, 2, 4.0), 1.0, SolveOptions(r_max=1e4))


@pytest.fixture(scope="session")
def profile_critical():
    # u(0) = 4^{1/2.4} is the family member with family parameter 1
    return solve_ivp(Params(9, 2, 4.4), 4.0 ** (1 / 2.4), SolveOptions(r_max=1e3, atol=1e-14))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
