"""Scalar ground state of -Lap w + w = w^{p-1} in R^3 and its mass-normalized rescalings.

The positive radial solution is found by shooting on w(0).  Past the radius where
double precision can no longer separate the decaying branch from the growing one,
the profile is continued by the exact linear tail A e^{-r}/r.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidParameter, NoConvergence
from .grid import (
    RadialField,
    RadialGrid,
    grad_norm_sq,
    integrate,
    laplacian_values,
    regularize_origin,
)

P_LOWER = 10.0 / 3.0
P_UPPER = 6.0

SERIES_RADIUS = 1e-3
SHOOT_RTOL = 1e-13
SHOOT_HORIZON = 80.0
# distance kept between the matching radius and the point where the two bisection
# trajectories separate; relative error there is about exp(-2 * margin)
TAIL_MARGIN = 10.0


def check_exponent(p: float) -> None:
    if not P_LOWER < p < P_UPPER:
        raise InvalidParameter(f"exponent p must lie in (10/3, 6), got {p}")


def gn_delta(p: float) -> float:
    """delta_p = 3 (1/2 - 1/p)."""
    return 3.0 * (0.5 - 1.0 / p)


@dataclass(frozen=True, eq=False)
class ShootingProfile:
    """Continuum profile w(r) produced by the shooting method."""

    p: float
    w0: float
    r_start: float
    r_match: float
    tail_amplitude: float
    _dense: Callable = field(repr=False)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        inner = r < self.r_start
        tail = r > self.r_match
        mid = ~inner & ~tail
        out[inner] = _series(self.w0, self.p, r[inner])[0]
        if np.any(mid):
            out[mid] = self._dense(r[mid])[0]
        out[tail] = self.tail_amplitude * np.exp(-r[tail]) / r[tail]
        return out


@dataclass(frozen=True, eq=False)
class ScalarSoliton:
    w: RadialField
    p: float
    w0: float
    mass_sq: float
    grad_sq: float
    lp_norm_p: float
    profile: ShootingProfile = field(repr=False)

    @property
    def nehari_residual(self) -> float:
        return abs(self.grad_sq + self.mass_sq - self.lp_norm_p) / self.lp_norm_p

    @property
    def pohozaev_residual(self) -> float:
        # 3-D Pohozaev identity for -Lap w + w = w^{p-1}: G/2 + 3m/2 = 3P/p
        rhs = 3.0 * self.lp_norm_p / self.p
        return abs(0.5 * self.grad_sq + 1.5 * self.mass_sq - rhs) / rhs

    def ode_residual(self) -> float:
        """Max of |Lap_h w - w + w^{p-1}| over the grid, relative to w0^{p-1}.

        Nodes within 4 spacings of r_max are skipped (the stencil is one-sided there).
        """
        w = self.w.values
        res = laplacian_values(w, self.w.grid) - w + np.abs(w) ** (self.p - 1)
        return float(np.abs(res[:-4]).max() / self.w0 ** (self.p - 1))

    def metadata(self) -> dict:
        return {
            "p": self.p,
            "w0": self.w0,
            "mass_sq": self.mass_sq,
            "grad_sq": self.grad_sq,
            "lp_norm_p": self.lp_norm_p,
            "r_match": self.profile.r_match,
            "tail_amplitude": self.profile.tail_amplitude,
            "grid": self.w.grid.descriptor(),
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2)


@dataclass(frozen=True, eq=False)
class NormalizedScalar:
    u: RadialField
    lam: float
    beta: float
    rho: float
    energy: float
    alpha: float
    gamma: float

    def mass_error(self) -> float:
        return abs(integrate(RadialField(self.u.grid, self.u.values**2)) - self.rho**2) / self.rho**2

    def equation_residual(self, p: float) -> float:
        u = self.u.values
        g = self.u.grid
        rhs = self.beta * np.abs(u) ** (p - 2) * u
        res = -laplacian_values(u, g) + self.lam * u - rhs
        res[0] = 0.0
        return float(np.sqrt(np.dot(g.weights, res**2) / np.dot(g.weights, rhs**2)))


def _series(w0, p, r):
    # w = w0 + a r^2 + b r^4 with 6a = f(w0), 20b = f'(w0) a, f(w) = w - w^{p-1}
    f0 = w0 - w0 ** (p - 1)
    df0 = 1.0 - (p - 1) * w0 ** (p - 2)
    a = f0 / 6.0
    b = df0 * a / 20.0
    return w0 + a * r**2 + b * r**4, 2 * a * r + 4 * b * r**3


def _rhs(p):
    def rhs(r, y):
        w, dw = y
        return [dw, -2.0 * dw / r + w - np.abs(w) ** (p - 2) * w]

    return rhs


def _extremum_or_zero(r, y):
    # w w' goes from - to + at a zero crossing or at a local minimum of |w|
    return y[0] * y[1]


_extremum_or_zero.direction = 1


def _start_radius(w0: float, p: float) -> float:
    # the series is accurate while w0^{p-2} r^2 stays small
    return SERIES_RADIUS * min(1.0, w0 ** (-(p - 2) / 2))


def _shoot_once(w0: float, p: float, nodes: int = 0):
    """Integrate from the series start; returns (regime, event radius).

    The trajectory is stopped at the (nodes + 1)-th sign change of w w'.  If that
    event is a zero of w the start value was too high, otherwise |w| turned away
    from zero and it was too low.
    """
    eps = _start_radius(w0, p)
    w_start, dw_start = _series(w0, p, eps)
    if dw_start > 0:
        return "low", eps
    event = _extremum_or_zero
    event.terminal = nodes + 1
    sol = solve_ivp(
        _rhs(p),
        (eps, SHOOT_HORIZON),
        [w_start, dw_start],
        method="DOP853",
        rtol=SHOOT_RTOL,
        atol=1e-300,
        events=event,
    )
    hits = sol.t_events[0]
    if hits.size < nodes + 1:
        return "none", SHOOT_HORIZON
    w_hit = sol.y_events[0][-1][0]
    if abs(w_hit) <= 1e-9 * w0:
        return "high", float(hits[-1])
    return "low", float(hits[-1])


@lru_cache(maxsize=32)
def shoot_profile(
    p: float, bracket: tuple[float, float] = (1.0, 50.0), nodes: int = 0
) -> ShootingProfile:
    """Bisection on w(0) for the radial solution with ``nodes`` sign changes."""
    check_exponent(p)
    if nodes < 0:
        raise InvalidParameter("nodes must be nonnegative")
    lo, hi = bracket
    if nodes > 0:
        lo = shoot_profile(p, bracket, nodes - 1).w0
    for _ in range(20):
        if _shoot_once(lo, p, nodes)[0] == "low":
            break
        lo *= 0.5
    else:
        raise NoConvergence("could not find a lower shooting bracket")
    for _ in range(20):
        if _shoot_once(hi, p, nodes)[0] == "high":
            break
        hi *= 2.0
    else:
        raise NoConvergence("could not find an upper shooting bracket")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        regime = _shoot_once(mid, p, nodes)[0]
        if regime == "high":
            hi = mid
        elif regime == "low":
            lo = mid
        else:
            lo = hi = mid
            break
    else:
        raise NoConvergence("shooting bisection did not collapse")

    r_split = min(_shoot_once(lo, p, nodes)[1], _shoot_once(hi, p, nodes)[1])
    r_match = r_split - TAIL_MARGIN
    if r_match < 5.0:
        raise NoConvergence(f"shooting trajectories separate too early (r = {r_split:.3g})")
    w0 = lo
    eps = _start_radius(w0, p)
    sol = solve_ivp(
        _rhs(p),
        (eps, r_match),
        list(_series(w0, p, eps)),
        method="DOP853",
        rtol=SHOOT_RTOL,
        atol=1e-300,
        dense_output=True,
    )
    w_match = float(sol.y[0, -1])
    if nodes == 0 and not w_match > 0:
        raise NoConvergence("shooting profile is not positive up to the matching radius")
    amplitude = w_match * r_match * np.exp(r_match)
    return ShootingProfile(
        p=p, w0=w0, r_start=eps, r_match=r_match, tail_amplitude=amplitude, _dense=sol.sol
    )


def soliton_from_profile(profile: ShootingProfile, grid: RadialGrid) -> ScalarSoliton:
    w = RadialField(grid, profile(grid.nodes))
    p = profile.p
    return ScalarSoliton(
        w=w,
        p=p,
        w0=profile.w0,
        mass_sq=integrate(RadialField(grid, w.values**2)),
        grad_sq=grad_norm_sq(w),
        lp_norm_p=integrate(RadialField(grid, np.abs(w.values) ** p)),
        profile=profile,
    )


def solve_kwong(p: float, grid: RadialGrid, tol: float = 1e-8) -> ScalarSoliton:
    """Positive radial solution of -Lap w + w = w^{p-1}, sampled on ``grid``.

    Raises NoConvergence if the profile at r_max exceeds ``tol`` (domain too short)
    or if the bisection cannot resolve the ground state.
    """
    check_exponent(p)
    if not tol > 0:
        raise InvalidParameter("tol must be positive")
    profile = shoot_profile(float(p))
    sol = soliton_from_profile(profile, grid)
    if abs(sol.w.values[-1]) >= tol:
        raise NoConvergence(
            f"|w(r_max)| = {abs(sol.w.values[-1]):.3g} exceeds tol = {tol:g}; increase r_max"
        )
    return sol


def discrete_ground_state(
    p: float, grid: RadialGrid, tol: float = 1e-11, max_iter: int = 30
) -> RadialField:
    """Solution of the discrete equation S w + W w = W w^{p-1} near the shooting profile.

    Newton iteration on nodes 1..N-1 started from the sampled continuum profile; the
    origin value comes from the even fit.  Differences between grids measure the
    discretization error of the sampled ground state.
    """
    import scipy.sparse as sp
    from scipy.sparse.linalg import spsolve

    check_exponent(p)
    w = shoot_profile(float(p))(grid.nodes)
    S = grid.stiffness[1:, 1:].tocsc()
    W = grid.weights[1:]
    for _ in range(max_iter):
        v = w[1:]
        a = np.abs(v)
        res = S @ v + W * v - W * a ** (p - 2) * v
        jac = S + sp.diags(W * (1.0 - (p - 1) * a ** (p - 2)))
        step = spsolve(jac.tocsc(), res)
        w[1:] = v - step
        # the residual itself stalls at roundoff of order eps |S|; the step does not
        if np.max(np.abs(step)) <= tol * np.max(np.abs(v)):
            break
    else:
        raise NoConvergence("Newton iteration for the discrete ground state did not converge")
    return RadialField(grid, regularize_origin(w, grid.nodes))


def rescale_coefficients(p: float, beta: float, rho: float, mass_sq: float) -> tuple[float, float]:
    """(alpha, gamma) with beta alpha^{p-2} = gamma^2 and alpha^2 gamma^{-3} mass_sq = rho^2."""
    if not beta > 0:
        raise InvalidParameter(f"beta must be positive, got {beta}")
    if not rho > 0:
        raise InvalidParameter(f"rho must be positive, got {rho}")
    gamma = (rho**2 * beta ** (2.0 / (p - 2)) / mass_sq) ** ((p - 2) / (10.0 - 3.0 * p))
    alpha = (gamma**2 / beta) ** (1.0 / (p - 2))
    return alpha, gamma


def rescale_to_mass(
    w: ScalarSoliton, beta: float, rho: float, grid: RadialGrid | None = None
) -> NormalizedScalar:
    """u(r) = alpha w(gamma r), solving -Lap u + gamma^2 u = beta u^{p-1} with |u|_2 = rho.

    Without ``grid`` the result lives on the soliton grid contracted by gamma, so the
    samples are exactly alpha * w_j.  With ``grid`` the continuum profile is evaluated
    at gamma * r_j.
    """
    p = w.p
    alpha, gamma = rescale_coefficients(p, beta, rho, w.mass_sq)
    if grid is None:
        grid = w.w.grid.scaled(1.0 / gamma)
        values = alpha * w.w.values
    else:
        values = alpha * w.profile(gamma * grid.nodes)
    u = RadialField(grid, values)
    energy = 0.5 * grad_norm_sq(u) - beta / p * integrate(RadialField(grid, np.abs(values) ** p))
    return NormalizedScalar(u=u, lam=gamma**2, beta=beta, rho=rho, energy=energy, alpha=alpha, gamma=gamma)


def gn_quotient(f: RadialField, p: float) -> float:
    """|f|_p / (|grad f|_2^delta |f|_2^{1-delta})."""
    delta = gn_delta(p)
    lp = integrate(RadialField(f.grid, np.abs(f.values) ** p)) ** (1.0 / p)
    l2 = integrate(RadialField(f.grid, f.values**2)) ** 0.5
    grad = grad_norm_sq(f) ** 0.5
    return lp / (grad**delta * l2 ** (1.0 - delta))


def gn_constant(p: float, w: ScalarSoliton) -> float:
    """Optimal Gagliardo-Nirenberg constant, attained by the ground state."""
    if abs(w.p - p) > 1e-14:
        raise InvalidParameter("soliton exponent does not match p")
    delta = gn_delta(p)
    return w.lp_norm_p ** (1.0 / p) / (w.grad_sq ** (delta / 2) * w.mass_sq ** ((1.0 - delta) / 2))


def theta_1(p: float, C_p: float) -> float:
    check_exponent(p)
    if not C_p > 0:
        raise InvalidParameter("C_p must be positive")
    return C_p ** (-4.0 * p / (3.0 * p - 10.0))


def default_soliton_grid() -> RadialGrid:
    from .grid import make_grid

    return make_grid(8192, 20.0)


def decoupled_levels(params, grid: RadialGrid | None = None) -> np.ndarray:
    """Energies c_i of the normalized scalar ground states (beta_ii, rho_i), one per component."""
    grid = grid if grid is not None else default_soliton_grid()
    w = solve_kwong(params.p, grid)
    return np.array(
        [rescale_to_mass(w, params.beta[i, i], params.rho[i]).energy for i in range(params.K)]
    )


def c0_level(params, grid: RadialGrid | None = None) -> float:
    """Smallest decoupled level (the threshold c_0 for K = 2)."""
    return float(decoupled_levels(params, grid).min())
