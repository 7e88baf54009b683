"""Energy, constraint and fibering quantities of the coupled system.

For u = (u_1, ..., u_K) we write

    A(u) = sum_i int |grad u_i|^2,
    B(u) = sum_{i,j} beta_ij int |u_i|^{p/2} |u_j|^{p/2},

so that J = A/2 - B/p and the Nehari-Pohozaev functional is M = A - 3(p-2)/(2p) B.
The mass-preserving dilation s * u = s^{3/2} u(s .) scales A by s^2 and B by
s^{3(p-2)/2}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateComponent, InvalidParameter, NoMaximizer, ShapeMismatch
from .grid import (
    RadialField,
    RadialGrid,
    dilate,
    dilate_by_regrid,
    laplacian_values,
)
from .soliton import check_exponent

DEGENERATE_MASS = 1e-14


@dataclass(frozen=True, eq=False)
class SystemParams:
    K: int
    p: float
    beta: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float, ndmin=2)
        rho = np.array(self.rho, dtype=float, ndmin=1)
        K = int(self.K)
        if K < 1:
            raise InvalidParameter("K must be at least 1")
        if beta.shape != (K, K):
            raise ShapeMismatch(f"beta has shape {beta.shape}, expected ({K}, {K})")
        if rho.shape != (K,):
            raise ShapeMismatch(f"rho has shape {rho.shape}, expected ({K},)")
        if not np.array_equal(beta, beta.T):
            raise InvalidParameter("beta must be symmetric")
        if not np.all(np.diag(beta) > 0):
            raise InvalidParameter("diagonal couplings beta_ii must be positive")
        if not np.all(rho > 0):
            raise InvalidParameter("masses rho_i must be positive")
        if not np.all(np.isfinite(beta)) or not np.all(np.isfinite(rho)):
            raise InvalidParameter("beta and rho must be finite")
        check_exponent(float(self.p))
        beta.flags.writeable = False
        rho.flags.writeable = False
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def uniform(cls, K: int, p: float, beta_diag, beta_off: float, rho) -> "SystemParams":
        """Equal off-diagonal coupling; ``beta_diag`` and ``rho`` may be scalars."""
        beta = np.full((K, K), float(beta_off))
        np.fill_diagonal(beta, np.broadcast_to(np.asarray(beta_diag, dtype=float), (K,)))
        return cls(K, p, beta, np.broadcast_to(np.asarray(rho, dtype=float), (K,)).copy())

    def with_coupling(self, beta_off: float) -> "SystemParams":
        """Same data with every off-diagonal entry replaced by ``beta_off``."""
        beta = np.full((self.K, self.K), float(beta_off))
        np.fill_diagonal(beta, np.diag(self.beta))
        return SystemParams(self.K, self.p, beta, self.rho.copy())

    def to_dict(self) -> dict:
        return {"K": self.K, "p": self.p, "beta": self.beta.tolist(), "rho": self.rho.tolist()}


@dataclass(frozen=True, eq=False)
class State:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ShapeMismatch("a state needs at least one component")
        g = comps[0].grid
        for c in comps[1:]:
            if not _same_grid(c.grid, g):
                raise ShapeMismatch("all components of a state must share one grid")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_values(cls, grid: RadialGrid, values) -> "State":
        values = np.atleast_2d(np.asarray(values, dtype=float))
        return cls(tuple(RadialField(grid, v) for v in values))

    @property
    def grid(self) -> RadialGrid:
        return self.components[0].grid

    @property
    def K(self) -> int:
        return len(self.components)

    @property
    def values(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])

    def flip(self, signs) -> "State":
        signs = np.asarray(signs, dtype=float).reshape(-1, 1)
        return State.from_values(self.grid, signs * self.values)

    def __len__(self) -> int:
        return self.K

    def __getitem__(self, i: int) -> RadialField:
        return self.components[i]


def _same_grid(a: RadialGrid, b: RadialGrid) -> bool:
    return a is b or (a.N == b.N and a.kind == b.kind and np.array_equal(a.nodes, b.nodes))


@dataclass(frozen=True)
class FiberCoefficients:
    A: float
    B: float

    def __post_init__(self):
        if self.A < 0:
            raise InvalidParameter("A must be nonnegative")


def _check(u: State, params: SystemParams) -> np.ndarray:
    if u.K != params.K:
        raise ShapeMismatch(f"state has {u.K} components, params expect K = {params.K}")
    return u.values


def _check_lambda(lam, K: int) -> np.ndarray:
    lam = np.asarray(lam, dtype=float).reshape(-1)
    if lam.shape != (K,):
        raise ShapeMismatch(f"lambda has length {lam.size}, expected {K}")
    return lam


def gradient_terms(u: State) -> np.ndarray:
    """Per-component int |grad u_i|^2."""
    U = u.values
    U = U - U[:, -1:]
    S = u.grid.stiffness
    return np.einsum("kn,kn->k", U, (S @ U.T).T)


def coupling_integrals(u: State, p: float) -> np.ndarray:
    """Matrix of int |u_i|^{p/2} |u_j|^{p/2}."""
    P = np.abs(u.values) ** (p / 2)
    return (P * u.grid.weights) @ P.T


def fiber_coefficients(u: State, params: SystemParams) -> FiberCoefficients:
    _check(u, params)
    A = float(gradient_terms(u).sum())
    B = float(np.sum(params.beta * coupling_integrals(u, params.p)))
    return FiberCoefficients(A=A, B=B)


def energy(u: State, params: SystemParams) -> float:
    c = fiber_coefficients(u, params)
    return 0.5 * c.A - c.B / params.p


def mass_vector(u: State) -> np.ndarray:
    return (u.values**2) @ u.grid.weights


def nonlinearity(U: np.ndarray, params: SystemParams) -> np.ndarray:
    """N_i = sum_j beta_ij sgn(u_i) |u_i|^{p/2-1} |u_j|^{p/2}, written to avoid 0^0."""
    h = params.p / 2
    P = np.abs(U) ** h
    return np.sign(U) * np.abs(U) ** (h - 1) * (params.beta @ P)


def residual_fields(u: State, lam, params: SystemParams) -> np.ndarray:
    U = _check(u, params)
    lam = _check_lambda(lam, params.K)
    return -laplacian_values(U, u.grid) + lam[:, None] * U - nonlinearity(U, params)


def gradient(u: State, lam, params: SystemParams) -> State:
    """-Lap u_i + lambda_i u_i - N_i(u), the L^2 gradient of J + sum lambda_i |u_i|^2 / 2."""
    return State.from_values(u.grid, residual_fields(u, lam, params))


def euler_lagrange_residual(u: State, lam, params: SystemParams) -> float:
    """Relative weighted 2-norm of the residual; 0 for the zero state."""
    R = residual_fields(u, lam, params)
    N = nonlinearity(u.values, params)
    w = u.grid.weights
    den = float(np.sum(w * N**2))
    num = float(np.sum(w * R**2))
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return float(np.sqrt(num / den))


def nehari_pohozaev(u: State, params: SystemParams) -> float:
    c = fiber_coefficients(u, params)
    return c.A - 3.0 * (params.p - 2) / (2.0 * params.p) * c.B


def _identity_terms(u: State, lam, params: SystemParams):
    c = fiber_coefficients(u, params)
    lam = _check_lambda(lam, params.K)
    L = float(np.dot(lam, mass_vector(u)))
    return c.A, c.B, L


def nehari_raw(u: State, lam, params: SystemParams) -> float:
    """A - B + sum lambda_i |u_i|_2^2, i.e. J'(u)[u] + sum lambda_i int u_i^2."""
    A, B, L = _identity_terms(u, lam, params)
    return A - B + L


def pohozaev_raw(u: State, lam, params: SystemParams) -> float:
    """A - (6/p) B + 3 sum lambda_i |u_i|_2^2."""
    A, B, L = _identity_terms(u, lam, params)
    return A - 6.0 / params.p * B + 3.0 * L


def nehari_residual(u: State, lam, params: SystemParams) -> float:
    A, B, L = _identity_terms(u, lam, params)
    scale = A + abs(B) + abs(L)
    return abs(A - B + L) / scale if scale > 0 else 0.0


def pohozaev_residual(u: State, lam, params: SystemParams) -> float:
    A, B, L = _identity_terms(u, lam, params)
    scale = A + 6.0 / params.p * abs(B) + 3.0 * abs(L)
    return abs(A - 6.0 / params.p * B + 3.0 * L) / scale if scale > 0 else 0.0


def _fiber_exponent(p: float) -> float:
    return 1.5 * (p - 2)


def fiber_energy(coeffs: FiberCoefficients, s: float, params: SystemParams) -> float:
    """phi(s) = J(s * u) = s^2 A/2 - s^{3(p-2)/2} B/p."""
    if not s > 0:
        raise InvalidParameter(f"s must be positive, got {s}")
    p = params.p
    return 0.5 * s**2 * coeffs.A - s ** _fiber_exponent(p) * coeffs.B / p


def fiber_derivative_sign(coeffs: FiberCoefficients, s: float, params: SystemParams) -> float:
    """sign of phi'(s), equal to the sign of M(s * u)."""
    p = params.p
    m = s**2 * coeffs.A - 3.0 * (p - 2) / (2.0 * p) * s ** _fiber_exponent(p) * coeffs.B
    return float(np.sign(m))


def fiber_maximizer(coeffs: FiberCoefficients, params: SystemParams) -> float:
    p = params.p
    if not coeffs.A > 0:
        raise InvalidParameter("fiber maximizer needs A > 0")
    if not coeffs.B > 0:
        raise NoMaximizer(f"B = {coeffs.B:.3g} <= 0, the fiber map has no critical point")
    return (2.0 * p * coeffs.A / (3.0 * (p - 2) * coeffs.B)) ** (2.0 / (3.0 * p - 10.0))


def dilate_state(u: State, s: float, mode: str = "interpolate") -> State:
    """s * u componentwise; ``mode="regrid"`` rescales the grid instead of resampling."""
    if mode == "interpolate":
        return State(tuple(dilate(c, s) for c in u.components))
    if mode == "regrid":
        return State(tuple(dilate_by_regrid(c, s) for c in u.components))
    raise InvalidParameter(f"unknown dilation mode {mode!r}")


def project_to_manifold(
    u: State, params: SystemParams, mode: str = "interpolate", rel_tol: float = 1e-12
) -> State:
    """s_u * u, which lies on the Nehari-Pohozaev set and keeps every mass.

    With ``mode="interpolate"`` the result stays on the grid of ``u`` and a few
    corrective projections absorb the interpolation drift in A and B.  With
    ``mode="regrid"`` the discrete A and B scale exactly and one step suffices.
    """
    v = u
    for _ in range(8):
        c = fiber_coefficients(v, params)
        s = fiber_maximizer(c, params)
        if s != 1.0:
            v = dilate_state(v, s, mode)
        if abs(nehari_pohozaev(v, params)) <= rel_tol * fiber_coefficients(v, params).A:
            break
    return v


def lagrange_multipliers(u: State, params: SystemParams) -> np.ndarray:
    """lambda_i from testing the i-th equation with u_i, using the measured masses."""
    m = mass_vector(u)
    _check(u, params)
    if np.any(m < DEGENERATE_MASS):
        i = int(np.argmin(m))
        raise DegenerateComponent(f"component {i} has mass {m[i]:.3g}")
    A_i = gradient_terms(u)
    BI = np.sum(params.beta * coupling_integrals(u, params.p), axis=1)
    return (BI - A_i) / m


def reduced_energy_factor(p: float) -> float:
    """(3p - 10) / (6(p - 2)): on the manifold J = factor * A."""
    return (3.0 * p - 10.0) / (6.0 * (p - 2.0))


def embed_scalar(field: RadialField, K: int, slot: int) -> State:
    """A state with ``field`` in component ``slot`` and zeros elsewhere."""
    values = np.zeros((K, field.grid.N))
    values[slot] = field.values
    return State.from_values(field.grid, values)
