import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupled_nls.errors import InvalidParameter, NoConvergence
from coupled_nls.functional import SystemParams
from coupled_nls.grid import RadialField, make_grid
from coupled_nls.soliton import (
    decoupled_levels,
    discrete_ground_state,
    gn_constant,
    gn_delta,
    gn_quotient,
    rescale_coefficients,
    rescale_to_mass,
    shoot_profile,
    solve_kwong,
    theta_1,
)

# regression constants pinned by the shooting oracle (N = 8192, r_max = 20)
W0_P4 = 4.337387679977
C_P4 = 0.44925701551
MASS_P4 = 18.89725130


def test_kwong_p4_regression(kwong4):
    assert abs(kwong4.w0 - W0_P4) <= 1e-9
    assert abs(kwong4.mass_sq - MASS_P4) <= 1e-6
    assert abs(gn_constant(4.0, kwong4) - C_P4) <= 1e-10


def test_kwong_identities(kwong4):
    assert kwong4.nehari_residual <= 1e-6
    assert kwong4.pohozaev_residual <= 1e-6
    assert kwong4.ode_residual() < 1e-8


def test_kwong_positive_decreasing(kwong4):
    w = kwong4.w.values
    assert np.all(w > 0)
    assert np.all(np.diff(w) <= 1e-10)


def test_discrete_solution_converges_to_shooting_value():
    # independent oracle: Newton on the discrete equation, fourth-order in h
    diffs = [abs(discrete_ground_state(4.0, make_grid(N, 20.0)).values[0] - W0_P4)
             for N in (2048, 4096)]
    assert diffs[1] < 1e-7
    assert diffs[0] / diffs[1] > 10


@pytest.mark.parametrize("p", [3.5, 14.0 / 3.0, 5.0])
def test_other_exponents(p):
    sol = solve_kwong(p, make_grid(8192, 20.0))
    assert sol.nehari_residual <= 1e-6
    assert sol.pohozaev_residual <= 1e-6
    assert np.all(sol.w.values > 0)


@pytest.mark.parametrize("p", [3.0, 10.0 / 3.0, 6.0, 7.5])
def test_exponent_range(p):
    with pytest.raises(InvalidParameter):
        solve_kwong(p, make_grid(256, 20.0))


def test_short_domain_raises():
    with pytest.raises(NoConvergence):
        solve_kwong(4.0, make_grid(1024, 4.0))


def test_bad_tol():
    with pytest.raises(InvalidParameter):
        solve_kwong(4.0, make_grid(1024, 20.0), tol=0.0)


def test_excited_profiles_have_nodes():
    r = np.linspace(0, 30, 30001)
    for nodes in (1, 2):
        prof = shoot_profile(4.0, nodes=nodes)
        w = prof(r)
        crossings = np.count_nonzero(np.diff(np.sign(w[w != 0])))
        assert crossings == nodes
        assert prof.w0 > shoot_profile(4.0, nodes=nodes - 1).w0


# rescaling ------------------------------------------------------------------


def test_rescale_identity_case(kwong4):
    alpha, gamma = rescale_coefficients(4.0, 1.0, math.sqrt(kwong4.mass_sq), kwong4.mass_sq)
    assert abs(alpha - 1) <= 1e-12 and abs(gamma - 1) <= 1e-12
    sc = rescale_to_mass(kwong4, 1.0, math.sqrt(kwong4.mass_sq))
    assert np.allclose(sc.u.values, kwong4.w.values, rtol=1e-12, atol=0)
    assert abs(sc.lam - 1) <= 1e-12


def test_rescale_p4_closed_form(kwong4):
    # alpha^2 = gamma^2 (beta = 1) and alpha^2 gamma^{-3} mass = 1 give gamma = mass
    alpha, gamma = rescale_coefficients(4.0, 1.0, 1.0, kwong4.mass_sq)
    assert abs(gamma - kwong4.mass_sq) <= 1e-12 * gamma
    assert abs(alpha - gamma) <= 1e-12 * gamma
    sc = rescale_to_mass(kwong4, 1.0, 1.0)
    assert sc.mass_error() <= 1e-8
    assert sc.equation_residual(4.0) <= 1e-6
    assert abs(sc.lam - gamma**2) <= 1e-9 * gamma**2


def test_rescale_on_given_grid(kwong4):
    sc = rescale_to_mass(kwong4, 1.0, 1.0, grid=make_grid(8192, 1.5))
    assert sc.mass_error() <= 1e-8


def test_rescale_mass_doubling(kwong4):
    # p = 4: gamma = mass / (rho^2 beta), so doubling rho divides lambda by 16
    a = rescale_to_mass(kwong4, 1.0, 1.0)
    b = rescale_to_mass(kwong4, 1.0, 2.0)
    assert abs(b.lam / a.lam - 1 / 16) <= 1e-12
    assert b.mass_error() <= 1e-8


@pytest.mark.parametrize("beta, rho", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
def test_rescale_rejects(kwong4, beta, rho):
    with pytest.raises(InvalidParameter):
        rescale_to_mass(kwong4, beta, rho)


# Gagliardo-Nirenberg ----------------------------------------------------------


def test_delta_arithmetic():
    # the exponent identity delta_p p > 2 used for the GN estimate
    assert gn_delta(4.0) == 0.75
    assert gn_delta(4.0) * 4.0 == 3.0 > 2


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.2, 5.0), g=st.floats(0.3, 3.0))
def test_gn_quotient_scale_invariant(kwong4, a, g):
    grid = make_grid(8192, 20.0 / g)
    f = RadialField(grid, a * kwong4.profile(g * grid.nodes))
    assert abs(gn_quotient(f, 4.0) - C_P4) <= 1e-8


def test_gn_inequality_random_fields(kwong4, rng):
    C = gn_constant(4.0, kwong4)
    grid = make_grid(4096, 30.0)
    r = grid.nodes
    for _ in range(100):
        k = rng.integers(1, 4)
        vals = np.zeros_like(r)
        for _ in range(k):
            vals += rng.normal() * np.exp(-((r - rng.uniform(0, 3)) ** 2) / rng.uniform(0.3, 4))
        f = RadialField(grid, vals)
        assert gn_quotient(f, 4.0) <= (1 + 1e-6) * C


def test_theta_1():
    assert theta_1(4.0, 1.0) == 1.0
    assert abs(theta_1(4.0, 0.5) - 0.5**-8) <= 1e-12 * 0.5**-8
    with pytest.raises(InvalidParameter):
        theta_1(4.0, 0.0)


@pytest.mark.parametrize("p", [4.0, 13.0 / 3.0, 14.0 / 3.0])
def test_theta_consistency(p):
    C = gn_constant(p, solve_kwong(p, make_grid(8192, 20.0)))
    assert abs(theta_1(p, C) ** (-(3 * p - 10) / 4) * C ** (-p) - 1) <= 1e-12


def test_gn_constant_checks_exponent(kwong4):
    with pytest.raises(InvalidParameter):
        gn_constant(5.0, kwong4)


# decoupled levels ---------------------------------------------------------------


def test_decoupled_levels_scalar(kwong4):
    params = SystemParams(1, 4.0, [[1.0]], [1.0])
    lev = decoupled_levels(params)
    assert lev.shape == (1,)
    assert lev[0] == rescale_to_mass(kwong4, 1.0, 1.0).energy
    assert abs(lev[0] - 178.5530534) <= 1e-6


def test_decoupled_levels_symmetric_and_monotone():
    sym = decoupled_levels(SystemParams(2, 4.0, [[1.0, 3.0], [3.0, 1.0]], [1.0, 1.0]))
    assert abs(sym[0] - sym[1]) <= 1e-10 * abs(sym[0])
    mono = decoupled_levels(SystemParams(2, 4.0, [[1.0, 0.0], [0.0, 2.0]], [1.0, 1.0]))
    assert mono[1] < mono[0]
