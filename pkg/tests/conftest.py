import numpy as np
import pytest

from coupled_nls.functional import SystemParams
from coupled_nls.grid import make_grid
from coupled_nls.soliton import default_soliton_grid, solve_kwong
from coupled_nls.solver import SolveOptions, gaussian_init, minimize_on_SM, suggest_grid

# pass/fail lines collected by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split()[0])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def kwong4():
    return solve_kwong(4.0, default_soliton_grid())


@pytest.fixture(scope="session")
def scalar_params():
    return SystemParams(1, 4.0, [[1.0]], [1.0])


@pytest.fixture(scope="session")
def pair_params():
    return SystemParams(2, 4.0, [[1.0, 5.0], [5.0, 1.0]], [1.0, 1.0])


@pytest.fixture(scope="session")
def scalar_ground(scalar_params):
    grid = suggest_grid(scalar_params)
    return minimize_on_SM(scalar_params, gaussian_init(scalar_params, grid, 0), SolveOptions())


@pytest.fixture(scope="session")
def pair_ground(pair_params):
    grid = suggest_grid(pair_params)
    return minimize_on_SM(pair_params, gaussian_init(pair_params, grid, 0), SolveOptions())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def grid12():
    return make_grid(4096, 12.0)
