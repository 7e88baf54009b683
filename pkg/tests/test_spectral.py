import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from coupled_nls.errors import InvalidParameter
from coupled_nls.functional import State, SystemParams
from coupled_nls.grid import RadialField, make_grid
from coupled_nls.spectral import (
    RadialPotential,
    _lowest_eigenvalues,
    _tridiagonal,
    clr_integral,
    count_negative_eigenvalues,
    decay_check,
    morse_index_component,
    morse_indices,
    morse_potential,
    negative_count_ell,
    shell_maxima,
    square_well,
    sturm_count,
)


def potential(grid, values):
    return RadialPotential(RadialField(grid, values))


def dense_eigs(diag, off):
    return np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))


# counting -----------------------------------------------------------------------


def test_free_and_repulsive():
    g = make_grid(512, 10.0)
    assert count_negative_eigenvalues(potential(g, np.zeros(g.N))).neg_count == 0
    assert count_negative_eigenvalues(potential(g, np.ones(g.N))).neg_count == 0


@pytest.mark.parametrize("factor, expected", [(0.9, 0), (1.1, 1)])
def test_square_well_threshold(factor, expected):
    # -v'' - V0 v = E v, v(0) = 0: first bound state at V0 a^2 = pi^2 / 4
    a = 1.0
    g = make_grid(4000, 50.0)
    V0 = factor * (math.pi / (2 * a)) ** 2
    assert negative_count_ell(square_well(g, V0, a), 0) == expected


def test_second_bound_state_threshold():
    # the n-th s-wave bound state appears at V0 a^2 = ((2n - 1) pi / 2)^2
    g = make_grid(4000, 50.0)
    crit = (1.5 * math.pi) ** 2
    assert negative_count_ell(square_well(g, 0.95 * crit, 1.0), 0) == 1
    assert negative_count_ell(square_well(g, 1.05 * crit, 1.0), 0) == 2


def test_harmonic_oscillator_counts():
    # -Lap + r^2 has eigenvalues 4 n + 2 l + 3 with multiplicity 2l + 1
    g = make_grid(3000, 10.0)
    W = potential(g, g.nodes**2 - 10.0)
    rep = count_negative_eigenvalues(W, ell_max=6)
    assert rep.counts_by_ell[:5] == (2, 2, 1, 1, 0)
    assert rep.neg_count == 2 + 3 * 2 + 5 + 7
    assert rep.ell0_count == 2
    assert np.allclose(rep.lowest_eigs[:2], [-7.0, -3.0], atol=1e-4)
    assert not rep.truncation_suspect


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), ell=st.integers(0, 3))
def test_sturm_matches_dense(seed, ell):
    rng = np.random.default_rng(seed)
    g = make_grid(256, 10.0)
    values = -rng.uniform(0, 40) * np.exp(-g.nodes**2 / rng.uniform(0.5, 4)) + rng.normal(0, 2, g.N)
    diag, off = _tridiagonal(potential(g, values), ell)
    eig = dense_eigs(diag, off)
    for x in (0.0, rng.uniform(-5, 5)):
        assert sturm_count(diag, off, x) == int(np.sum(eig < x))
    assert np.allclose(_lowest_eigenvalues(diag, off, 5), eig[:5], atol=1e-9 * max(1, abs(eig[0])))


def test_graded_grid_counts():
    g = make_grid(3000, 10.0, "graded")
    rep = count_negative_eigenvalues(potential(g, g.nodes**2 - 10.0), ell_max=6)
    assert rep.counts_by_ell[:5] == (2, 2, 1, 1, 0)


@pytest.mark.filterwarnings("ignore:l = 8 still has")  # deep wells exceed ell_max by design
def test_monotone_in_ell_and_depth(rng):
    g = make_grid(1000, 20.0)
    base = -30 * np.exp(-g.nodes**2 / 3)
    counts = [negative_count_ell(potential(g, base), ell) for ell in range(6)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    inside = g.nodes < 5
    prev = 0
    for c in (0, 5, 10, 20, 40):
        n = count_negative_eigenvalues(potential(g, base - c * inside)).neg_count
        assert n >= prev
        prev = n


def test_truncation_warning():
    g = make_grid(1000, 20.0)
    with pytest.warns(RuntimeWarning):
        rep = count_negative_eigenvalues(potential(g, -400 * np.exp(-g.nodes**2 / 4)), ell_max=1)
    assert rep.truncation_suspect


def test_negative_ell_max():
    g = make_grid(64, 5.0)
    with pytest.raises(InvalidParameter):
        count_negative_eigenvalues(potential(g, np.zeros(g.N)), ell_max=-1)


# CLR integral -------------------------------------------------------------------------


def test_clr_integral_properties():
    g = make_grid(4096, 12.0)
    W = -np.exp(-g.nodes**2)
    one = clr_integral(potential(g, W))
    assert clr_integral(potential(g, np.abs(W))) == 0.0
    assert abs(clr_integral(potential(g, 4 * W)) - 8 * one) <= 1e-12 * one
    oracle = 4 * math.pi * quad(lambda r: math.exp(-1.5 * r * r) * r * r, 0, 12, epsabs=1e-14)[0]
    assert abs(one - oracle) <= 1e-8


def test_report_fields():
    g = make_grid(1000, 20.0)
    rep = count_negative_eigenvalues(potential(g, -30 * np.exp(-g.nodes**2)), clr_constant=2.0)
    d = rep.to_dict()
    assert d["clr_constant"] == 2.0 and d["clr_provenance"] == "unsourced"
    assert rep.clr_bound == 2.0 * rep.clr_integral
    assert rep.clr_ratio == rep.neg_count / rep.clr_integral
    assert rep.neg_count >= rep.ell0_count >= 0


# Morse potential and index ---------------------------------------------------------------


def test_morse_potential_scalar():
    g = make_grid(256, 8.0)
    u = State.from_values(g, [np.exp(-g.nodes**2)])
    params = SystemParams(1, 4.5, [[2.0]], [1.0])
    W = morse_potential(u, 0, params).W.values
    assert np.allclose(W, -3.5 * 2.0 * np.exp(-g.nodes**2) ** 2.5, rtol=1e-14, atol=0)


def test_morse_potential_pair_direct_formula():
    g = make_grid(256, 8.0)
    r = g.nodes
    u1, u2 = np.exp(-r**2), 0.5 * np.exp(-0.5 * r**2)
    params = SystemParams(2, 4.0, [[1.0, 3.0], [3.0, 2.0]], [1.0, 1.0])
    u = State.from_values(g, [u1, u2])
    W0 = morse_potential(u, 0, params).W.values
    W1 = morse_potential(u, 1, params).W.values
    assert np.allclose(W0, -3 * u1**2 - 3.0 * u2**2, rtol=1e-14, atol=0)
    assert np.allclose(W1, -3 * 2.0 * u2**2 - 3.0 * u1**2, rtol=1e-14, atol=0)
    zero = State.from_values(g, [np.zeros_like(r), u2])
    # first term vanishes with u_1; the coupling term survives at p = 4
    assert np.allclose(morse_potential(zero, 0, params).W.values, -3.0 * u2**2)


def test_morse_requires_p4():
    g = make_grid(64, 5.0)
    params = SystemParams(1, 3.5, [[1.0]], [1.0])
    with pytest.raises(InvalidParameter):
        morse_potential(State.from_values(g, [np.ones(g.N)]), 0, params)


def test_morse_index_scalar_ground(scalar_ground, scalar_params):
    st = scalar_ground.state
    assert morse_index_component(st, 0, scalar_params) == 1
    assert morse_index_component(st, 0, scalar_params, with_multiplier=True) == 1
    assert morse_indices(st, scalar_params) == (1,)


def test_morse_index_zero_component(pair_params):
    g = make_grid(256, 8.0)
    st = State.from_values(g, [np.zeros(g.N), np.exp(-g.nodes**2)])
    assert morse_index_component(st, 0, pair_params) == 0


def test_morse_index_pair_finite(pair_ground, pair_params):
    st = pair_ground.state
    for i in range(2):
        W = morse_potential(st, i, pair_params)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            rep = count_negative_eigenvalues(W)
        assert morse_index_component(st, i, pair_params) == rep.ell0_count


# decay -----------------------------------------------------------------------------------


def test_shell_maxima_bump_support():
    g = make_grid(1000, 16.0)
    bump = np.where(g.nodes < 3.0, 1.0, 0.0)
    sm = shell_maxima(State.from_values(g, [bump]))
    # shells (8, 16] and (4, 8] lie beyond the support
    assert sm[0, -1] == 0.0 and sm[0, -2] == 0.0 and sm[0, 0] > 0


def test_shell_maxima_ground_decreasing(scalar_ground):
    sm = shell_maxima(scalar_ground.state)
    assert np.all(np.diff(sm[0]) < 0)
    assert decay_check(scalar_ground.state)[0] == sm[0, -1]


def test_shell_maxima_negative_control():
    g = make_grid(4000, 1000.0)
    sm = shell_maxima(State.from_values(g, [1.0 / (1.0 + g.nodes)]))
    assert np.allclose(sm[0], 1.0, atol=0.01)
