import numpy as np
import pytest

from coupled_nls.errors import InvalidParameter, NoMaximizer
from coupled_nls.functional import State, SystemParams, lagrange_multipliers
from coupled_nls.soliton import decoupled_levels
from coupled_nls.solver import (
    SolveOptions,
    beta_sweep_c1,
    gaussian_init,
    minimize_on_SM,
    multi_level_search,
    nonexistence_demo,
    orbit_distance,
    suggest_grid,
)


@pytest.mark.parametrize("kw", [{"max_iters": 0}, {"grad_tol": 0.0}, {"m_tol": -1.0},
                                {"step0": 0.0}, {"deflation_shift": -1.0}])
def test_options_validation(kw):
    with pytest.raises(InvalidParameter):
        SolveOptions(**kw)


def test_scalar_ground_energy(scalar_ground, scalar_params):
    ref = decoupled_levels(scalar_params)[0]
    assert scalar_ground.converged
    assert abs(scalar_ground.energy - ref) <= 1e-4 * ref
    assert scalar_ground.m_residual <= 1e-8
    assert scalar_ground.mass_error <= 1e-8
    assert scalar_ground.nehari_res <= 1e-6 and scalar_ground.pohozaev_res <= 1e-6
    assert abs(scalar_ground.lam[0] - 18.89725130**2) <= 1e-3 * 18.89725130**2


def test_scalar_ground_deterministic(scalar_params, scalar_ground):
    grid = suggest_grid(scalar_params)
    again = minimize_on_SM(scalar_params, gaussian_init(scalar_params, grid, 0), SolveOptions())
    assert again.energy == scalar_ground.energy
    assert np.array_equal(again.state.values, scalar_ground.state.values)


def test_pair_ground_state(pair_ground, pair_params):
    rep = pair_ground
    assert rep.converged
    U = rep.state.values
    assert np.all(U >= 0)
    assert rep.energy < decoupled_levels(pair_params).min()
    assert np.all(rep.lam > 0)
    # symmetric data: the two components coincide
    assert np.max(np.abs(U[0] - U[1])) <= 1e-4 * U.max()
    summary = rep.summary()
    assert summary["converged"] and summary["grid"]["N"] == rep.state.grid.N


def test_history_decreases(pair_ground):
    h = np.array(pair_ground.history)
    assert h.size >= 2 and np.all(np.diff(h) <= 1e-12 * abs(h[0]))


def test_init_checks(pair_params, scalar_params):
    grid = suggest_grid(pair_params, 512)
    with pytest.raises(InvalidParameter):
        minimize_on_SM(scalar_params, gaussian_init(pair_params, grid), SolveOptions())
    with pytest.raises(InvalidParameter):
        minimize_on_SM(pair_params, State.from_values(grid, np.zeros((2, grid.N))))


def test_repulsive_overlap_has_no_maximizer():
    params = SystemParams(2, 4.0, [[1.0, -10.0], [-10.0, 1.0]], [1.0, 1.0])
    grid = suggest_grid(params, 512)
    u = gaussian_init(SystemParams(2, 4.0, np.eye(2), [1.0, 1.0]), grid, 0)
    same = State.from_values(grid, [u.values[0], u.values[0]])
    with pytest.raises(NoMaximizer):
        minimize_on_SM(params, same)


def test_orbit_distance(pair_ground):
    u = pair_ground.state
    assert orbit_distance(u, u) == 0.0
    assert orbit_distance(u, u.flip([-1, 1])) == 0.0
    assert orbit_distance(u, u.flip([-1, -1])) == 0.0


def test_multi_level_m1(pair_params, pair_ground):
    with pytest.raises(InvalidParameter):
        multi_level_search(pair_params, 0)
    grid = suggest_grid(pair_params, 2048)
    search = multi_level_search(pair_params, 1, SolveOptions(), grid)
    assert len(search) == 1 and not search.shortfall
    assert search[0].energy == pair_ground.energy


def test_multi_level_two_orbits():
    params = SystemParams(2, 4.0, [[1.0, 50.0], [50.0, 1.0]], [1.0, 1.0])
    search = multi_level_search(params, 2, SolveOptions())
    assert len(search) == 2
    e = [r.energy for r in search]
    assert e[0] < e[1] < decoupled_levels(params).min()
    # the excited orbit is a genuinely different solution, not a sign flip
    assert all(r.converged for r in search)
    assert np.any(search[1].state.values < 0)


def test_sweep_single_row_matches_solver(pair_params, pair_ground):
    table = beta_sweep_c1(pair_params, [5.0], SolveOptions(), N=2048)
    assert table.rows[0].energy == pair_ground.energy
    assert table.to_csv().splitlines()[0] == "beta,energy,m_residual,converged"


def test_sweep_decay():
    template = SystemParams(2, 4.0, [[1.0, 100.0], [100.0, 1.0]], [1.0, 1.0])
    table = beta_sweep_c1(template, [100.0, 1000.0, 10000.0])
    e = [r.energy for r in table.rows]
    assert all(r.converged for r in table.rows)
    assert e[0] > e[1] > e[2]
    assert -2.2 <= table.slope() <= -1.8


@pytest.mark.parametrize("betas", [[], [1.0, 0.5], [-1.0, 2.0]])
def test_sweep_rejects(pair_params, betas):
    with pytest.raises(InvalidParameter):
        beta_sweep_c1(pair_params, betas)


def test_sweep_requires_pair(scalar_params):
    with pytest.raises(InvalidParameter):
        beta_sweep_c1(scalar_params, [1.0])


def test_nonexistence_table():
    params = SystemParams(2, 4.0, [[1.0, -1.0], [-1.0, 1.0]], [1.0, 1.0])
    table = nonexistence_demo(params, n_steps=8)
    c1 = decoupled_levels(params).min()
    assert abs(table.c1 - c1) <= 1e-6 * c1
    pos = [r for r in table.rows if r.positive]
    assert len(pos) >= 6
    assert all(r.energy > table.c1 for r in pos)
    assert abs(pos[-1].s_u - 1) <= 1e-3
    assert table.to_csv().splitlines()[0] == "s_n,A,B,s_u,energy,excess,positive"


@pytest.mark.parametrize("beta12, n", [(1.0, 8), (-1.0, 1)])
def test_nonexistence_rejects(beta12, n):
    params = SystemParams(2, 4.0, [[1.0, beta12], [beta12, 1.0]], [1.0, 1.0])
    with pytest.raises(InvalidParameter):
        nonexistence_demo(params, n_steps=n)


def test_multipliers_of_solution(pair_ground, pair_params):
    lam = lagrange_multipliers(pair_ground.state, pair_params)
    assert np.allclose(lam, pair_ground.lam, rtol=1e-6)
