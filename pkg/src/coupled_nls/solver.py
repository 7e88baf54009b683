"""Ground states on S cap M, deflated searches for further levels, coupling sweeps and
the repulsive-coupling test sequence.

The minimizer descends the reduced functional F(u) = J(s_u * u) on the mass spheres.
F is invariant under the dilation u -> s * u, and a grid rescaled by 1/s carries
s * u exactly (values s^{3/2} u_j, every discrete integral scaling as in the
continuum).  Projection onto M is therefore done by rescaling the grid.  Once the
descent is close, a Newton solve on the Euler-Lagrange system with the mass
constraints polishes the critical point.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solveh_banded
from scipy.sparse.linalg import spsolve

from .errors import InvalidParameter, NoConvergence, NoMaximizer
from .functional import (
    FiberCoefficients,
    State,
    SystemParams,
    coupling_integrals,
    dilate_state,
    energy,
    euler_lagrange_residual,
    fiber_coefficients,
    fiber_maximizer,
    gradient_terms,
    lagrange_multipliers,
    mass_vector,
    nehari_pohozaev,
    nehari_residual,
    nonlinearity,
    pohozaev_residual,
    reduced_energy_factor,
)
from .grid import RadialGrid, make_grid, regularize_origin, sample, RadialField
from .soliton import (
    NormalizedScalar,
    rescale_coefficients,
    rescale_to_mass,
    shoot_profile,
    solve_kwong,
    soliton_from_profile,
)

ARMIJO = 1e-4
NEWTON_SWITCH = 1e-3
MASS_TOL = 1e-8


@dataclass(frozen=True)
class SolveOptions:
    max_iters: int = 3000
    step0: float = 1.0
    grad_tol: float = 1e-6
    m_tol: float = 1e-8
    seed: int = 0
    deflation_shift: float = 1.0
    distinct_tol: float = 1e-3
    newton_polish: bool = True
    newton_iters: int = 60

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidParameter("max_iters must be at least 1")
        for name in ("step0", "grad_tol", "m_tol", "distinct_tol"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"{name} must be positive")
        if self.deflation_shift < 0:
            raise InvalidParameter("deflation_shift must be nonnegative")


@dataclass(frozen=True, eq=False)
class SolveReport:
    state: State
    energy: float
    m_residual: float
    lam: np.ndarray
    pohozaev_res: float
    nehari_res: float
    el_res: float
    mass_error: float
    iterations: int
    converged: bool
    history: tuple = ()
    message: str = ""
    morse_index_components: tuple | None = None

    def summary(self) -> dict:
        return {
            "energy": self.energy,
            "m_residual": self.m_residual,
            "lambda": [float(x) for x in self.lam],
            "pohozaev_res": self.pohozaev_res,
            "nehari_res": self.nehari_res,
            "el_res": self.el_res,
            "mass_error": self.mass_error,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "morse_index_components": (
                None if self.morse_index_components is None else list(self.morse_index_components)
            ),
            "grid": self.state.grid.descriptor(),
        }


# ---------------------------------------------------------------------------
# scales and initial data


def effective_scalar(params: SystemParams) -> tuple[float, float]:
    """(beta_eff, rho_tot) such that u_i = (rho_i / rho_tot) v gives B = beta_eff int |v|^p."""
    p = params.p
    rho_tot = float(np.sqrt(np.sum(params.rho**2)))
    rr = np.outer(params.rho, params.rho) ** (p / 2)
    beta_eff = float(np.sum(params.beta * rr)) / rho_tot**p
    return beta_eff, rho_tot


def length_scale(params: SystemParams) -> float:
    """Largest decay length among the decoupled and the synchronized scalar states."""
    w = shoot_profile(params.p)
    mass = soliton_from_profile(w, make_grid(4096, 20.0)).mass_sq
    lengths = [
        1.0 / rescale_coefficients(params.p, params.beta[i, i], params.rho[i], mass)[1]
        for i in range(params.K)
    ]
    beta_eff, rho_tot = effective_scalar(params)
    if beta_eff > 0:
        lengths.append(1.0 / rescale_coefficients(params.p, beta_eff, rho_tot, mass)[1])
    return max(lengths)


def suggest_grid(params: SystemParams, N: int = 2048, lengths: float = 32.0) -> RadialGrid:
    """Uniform grid reaching ``lengths`` decay lengths of the expected solution."""
    return make_grid(N, lengths * length_scale(params))


def gaussian_init(params: SystemParams, grid: RadialGrid, seed: int = 0) -> State:
    """Positive Gaussian bumps with randomized widths, normalized to the target masses."""
    rng = np.random.default_rng(seed)
    L = grid.r_max / 32.0
    r = grid.nodes
    widths = L * rng.uniform(0.6, 1.6, params.K)
    values = np.exp(-0.5 * (r[None, :] / widths[:, None]) ** 2)
    return State.from_values(grid, _normalize(values, grid, params.rho))


def _normalize(U: np.ndarray, grid: RadialGrid, rho: np.ndarray) -> np.ndarray:
    m = (U**2) @ grid.weights
    return U * (rho / np.sqrt(m))[:, None]


# ---------------------------------------------------------------------------
# reduced functional


def _reduced_exponents(p: float) -> tuple[float, float, float]:
    e = 3.0 * p - 10.0
    a = (3.0 * p - 6.0) / e
    b = 4.0 / e
    kappa = reduced_energy_factor(p) * (2.0 * p / (3.0 * (p - 2))) ** b
    return a, b, kappa


def _AB(U, grid, params):
    Uc = U - U[:, -1:]
    SU = (grid.stiffness @ Uc.T).T
    A_i = np.einsum("kn,kn->k", Uc, SU)
    P = np.abs(U) ** (params.p / 2)
    I = (P * grid.weights) @ P.T
    return A_i, I, SU


def _reduced(U, grid, params):
    """F, its W-gradient field, and the pieces used for diagnostics."""
    p = params.p
    a, b, kappa = _reduced_exponents(p)
    A_i, I, SU = _AB(U, grid, params)
    A = A_i.sum()
    B = float(np.sum(params.beta * I))
    if not B > 0:
        return None
    F = kappa * A**a * B ** (-b)
    w = grid.weights
    N = nonlinearity(U, params)
    G = np.zeros_like(U)
    G[:, 1:] = F * (a * 2.0 * SU[:, 1:] / w[1:] / A - b * p * N[:, 1:] / B)
    return F, G, A, B, A_i, I, N, SU


def _projected_diagnostics(U, grid, params, A_i, I, N, SU):
    """Euler-Lagrange residual and multipliers of s_u * u without building the new grid."""
    p = params.p
    A = A_i.sum()
    B = float(np.sum(params.beta * I))
    s = fiber_maximizer(FiberCoefficients(A, B), params)
    e = 1.5 * (p - 2)
    w = grid.weights
    m = (U**2) @ w
    lam = (s**e * np.sum(params.beta * I, axis=1) - s**2 * A_i) / m
    # residual of s*u scaled by s^{-3/2}: s^2 (-Lap u) + lam u - s^e N(u)
    lap = np.zeros_like(U)
    lap[:, 1:] = SU[:, 1:] / w[1:]
    R = s**2 * lap + lam[:, None] * U - s**e * N
    num = np.sum(w * R**2)
    den = np.sum(w * (s**e * N) ** 2)
    return s, lam, float(np.sqrt(num / den))


def _precondition(V, grid, sigma):
    ab0 = grid.stiffness_banded
    out = np.zeros_like(V)
    for i in range(V.shape[0]):
        ab = ab0.copy()
        ab[2] += sigma[i] * grid.weights[1:]
        out[i, 1:] = solveh_banded(ab, V[i, 1:] * grid.weights[1:])
    return out


def _retract(U, grid, rho):
    return regularize_origin(_normalize(U, grid, rho), grid.nodes)


def _descend(U, grid, params, opts, max_iters, target):
    """Preconditioned projected descent on F; returns (U, iterations, history, el_res)."""
    w = grid.weights
    pieces = _reduced(U, grid, params)
    if pieces is None:
        raise NoMaximizer("initial state has B <= 0")
    F, G, A, B, A_i, I, N, SU = pieces
    a = _reduced_exponents(params.p)[0]
    history = [F]
    tau = opts.step0
    el = math.inf
    it = 0
    for it in range(1, max_iters + 1):
        s, lam, el = _projected_diagnostics(U, grid, params, A_i, I, N, SU)
        if el <= target:
            break
        m = (U**2) @ w
        sigma = np.maximum(lam, 0.25 * A_i / m)
        PG = _precondition(G, grid, sigma)
        PU = _precondition(U, grid, sigma)
        mu = np.sum(w * U * PG, axis=1) / np.sum(w * U * PU, axis=1)
        D = -(A / (2.0 * a * F)) * (PG - mu[:, None] * PU)
        slope = float(np.sum(w * G * D))
        if slope >= 0:
            break
        tau = min(opts.step0, 2.0 * tau)
        accepted = False
        for _ in range(40):
            V = _retract(U + tau * D, grid, params.rho)
            trial = _reduced(V, grid, params)
            if trial is not None and trial[0] <= F + ARMIJO * tau * slope:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            break
        U = V
        F, G, A, B, A_i, I, N, SU = trial
        history.append(F)
    return U, it, history, el


# ---------------------------------------------------------------------------
# Newton on (u, lambda)


def _nonlinearity_jacobian(U, params):
    """Diagonal blocks dN_i/du_j evaluated pointwise, shape (K, K, N)."""
    h = params.p / 2
    K = U.shape[0]
    absU = np.abs(U)
    P = absU**h
    floor = 1e-12 * max(absU.max(), 1e-300)
    safe = np.maximum(absU, floor)
    sgn = np.sign(U)
    BP = params.beta @ P
    Dn = np.empty((K, K, U.shape[1]))
    for i in range(K):
        for j in range(K):
            if i == j:
                if h == 2.0:
                    first = BP[i]
                else:
                    first = (h - 1) * safe[i] ** (h - 2) * BP[i]
                Dn[i, i] = first + h * params.beta[i, i] * absU[i] ** (2 * h - 2)
            else:
                Dn[i, j] = (
                    h * params.beta[i, j] * sgn[i] * absU[i] ** (h - 1) * sgn[j] * absU[j] ** (h - 1)
                )
    return Dn


def _newton_residual(U, lam, grid, params):
    w = grid.weights
    Uc = U - U[:, -1:]
    SU = (grid.stiffness @ Uc.T).T
    R = SU + lam[:, None] * w * U - w * nonlinearity(U, params)
    mass = 0.5 * ((U**2) @ w - params.rho**2)
    return R[:, 1:], mass


def _merit(R, mass, w):
    return float(np.sqrt(np.sum(R**2 / w[1:]) + np.sum(mass**2)))


def _newton_jacobian(U, lam, grid, params):
    K, n = U.shape[0], grid.N - 1
    w = grid.weights[1:]
    S = grid.stiffness[1:, 1:]
    Dn = _nonlinearity_jacobian(U, params)[:, :, 1:]
    blocks = [[None] * (K + 1) for _ in range(K + 1)]
    for i in range(K):
        for j in range(K):
            if i == j:
                blocks[i][j] = S + sp.diags(lam[i] * w - w * Dn[i, i])
            else:
                blocks[i][j] = sp.diags(-w * Dn[i, j])
    WU = sp.csr_matrix(np.zeros((K * n, K)))
    cols = []
    for i in range(K):
        col = np.zeros((K * n, 1))
        col[i * n:(i + 1) * n, 0] = w * U[i, 1:]
        cols.append(col)
    WU = sp.csr_matrix(np.hstack(cols))
    top = sp.bmat([row[:K] for row in blocks[:K]], format="csr")
    Jac = sp.bmat([[top, WU], [WU.T, None]], format="csc")
    return Jac


@dataclass
class _Deflation:
    """Multiplicative penalty prod_k (1 + shift / d_k^2), d measured modulo sign flips."""

    known: list
    shift: float
    grid: RadialGrid

    def _metric(self, V):
        S = self.grid.stiffness
        Vc = V - V[:, -1:]
        return float(np.sum(Vc * (S @ Vc.T).T) + np.sum(V**2 * self.grid.weights))

    def _apply_metric(self, V):
        S = self.grid.stiffness
        Vc = V - V[:, -1:]
        return (S @ Vc.T).T + V * self.grid.weights

    def closest(self, U, Uk):
        K = U.shape[0]
        best = None
        for mask in range(2**K):
            signs = np.array([1.0 if (mask >> i) & 1 == 0 else -1.0 for i in range(K)])
            diff = U - signs[:, None] * Uk
            d2 = self._metric(diff) / self._metric(Uk)
            if best is None or d2 < best[0]:
                best = (d2, diff)
        return best

    def factor_and_grad(self, U):
        logM = 0.0
        grad = np.zeros_like(U)
        for Uk in self.known:
            d2, diff = self.closest(U, Uk)
            d2 = max(d2, 1e-300)
            logM += math.log1p(self.shift / d2)
            coef = -2.0 * self.shift / (d2 * (d2 + self.shift)) / self._metric(Uk)
            grad += coef * self._apply_metric(diff)
        return math.exp(logM), grad


def _newton(U, lam, grid, params, opts, deflation=None, tol=None):
    """Damped (optionally deflated) Newton on the Euler-Lagrange system with mass rows."""
    tol = opts.grad_tol if tol is None else tol
    w = grid.weights
    K, n = U.shape[0], grid.N - 1
    U = U.copy()
    lam = np.array(lam, dtype=float)
    for it in range(1, opts.newton_iters + 1):
        R, mass = _newton_residual(U, lam, grid, params)
        scale = 1.0
        if deflation is not None and deflation.known:
            scale, dgrad = deflation.factor_and_grad(U)
        merit = scale * _merit(R, mass, w)
        Jac = _newton_jacobian(U, lam, grid, params)
        rhs = -np.concatenate([R.ravel(), mass])
        try:
            delta = spsolve(Jac, rhs)
        except RuntimeError:
            return U, lam, it, False
        if not np.all(np.isfinite(delta)):
            return U, lam, it, False
        dU = np.zeros_like(U)
        dU[:, 1:] = delta[: K * n].reshape(K, n)
        dlam = delta[K * n:]
        if deflation is not None and deflation.known:
            g = float(np.sum(dgrad * dU))
            factor = 1.0 / (1.0 - g) if abs(1.0 - g) > 1e-12 else 1.0
            dU *= factor
            dlam *= factor
        t = 1.0
        for _ in range(30):
            V = regularize_origin(U + t * dU, grid.nodes)
            mu = lam + t * dlam
            R2, mass2 = _newton_residual(V, mu, grid, params)
            s2 = 1.0
            if deflation is not None and deflation.known:
                s2 = deflation.factor_and_grad(V)[0]
            if s2 * _merit(R2, mass2, w) < (1.0 - 1e-4 * t) * merit:
                break
            t *= 0.5
        else:
            return U, lam, it, False
        U, lam = V, mu
        st = State.from_values(grid, U)
        if (
            euler_lagrange_residual(st, lam, params) <= 0.1 * tol
            and np.max(np.abs((U**2) @ w - params.rho**2) / params.rho**2) <= 0.1 * MASS_TOL
        ):
            return U, lam, it, True
    return U, lam, opts.newton_iters, False


# ---------------------------------------------------------------------------
# reports


def make_report(
    state: State,
    params: SystemParams,
    opts: SolveOptions,
    iterations: int = 0,
    history=(),
    lam=None,
    message: str = "",
) -> SolveReport:
    lam = lagrange_multipliers(state, params) if lam is None else np.asarray(lam, dtype=float)
    c = fiber_coefficients(state, params)
    m_res = abs(nehari_pohozaev(state, params)) / c.A
    el = euler_lagrange_residual(state, lam, params)
    mass_err = float(np.max(np.abs(mass_vector(state) - params.rho**2) / params.rho**2))
    converged = el <= opts.grad_tol and m_res <= opts.m_tol and mass_err <= MASS_TOL
    return SolveReport(
        state=state,
        energy=energy(state, params),
        m_residual=m_res,
        lam=lam,
        pohozaev_res=pohozaev_residual(state, lam, params),
        nehari_res=nehari_residual(state, lam, params),
        el_res=el,
        mass_error=mass_err,
        iterations=iterations,
        converged=converged,
        history=tuple(history),
        message=message,
    )


def _regrid_project(U, grid, params) -> State:
    st = State.from_values(grid, U)
    s = fiber_maximizer(fiber_coefficients(st, params), params)
    return dilate_state(st, s, "regrid")


# ---------------------------------------------------------------------------
# public solvers


def minimize_on_SM(params: SystemParams, init: State, opts: SolveOptions | None = None) -> SolveReport:
    """Minimize J over the mass spheres intersected with the Nehari-Pohozaev set."""
    opts = opts or SolveOptions()
    if init.K != params.K:
        raise InvalidParameter(f"init has {init.K} components, params expect {params.K}")
    if np.any(mass_vector(init) <= 0):
        raise InvalidParameter("init components must be nonzero")
    grid = init.grid
    U = _retract(init.values, grid, params.rho)
    c = fiber_coefficients(State.from_values(grid, U), params)
    if not c.B > 0:
        raise NoMaximizer(f"B(init) = {c.B:.3g} <= 0")
    st = _regrid_project(U, grid, params)
    grid, U = st.grid, st.values

    total = 0
    history: list = []
    target = NEWTON_SWITCH if opts.newton_polish else opts.grad_tol
    message = ""
    while True:
        U, its, hist, el = _descend(U, grid, params, opts, opts.max_iters - total, target)
        total += its
        history.extend(hist if not history else hist[1:])
        st = _regrid_project(U, grid, params)
        if el <= opts.grad_tol:
            message = "descent converged"
            break
        if opts.newton_polish and el <= target:
            lam = lagrange_multipliers(st, params)
            V, lam, nits, ok = _newton(st.values, lam, st.grid, params, opts)
            if ok and (np.all(V >= -1e-12 * np.abs(V).max()) or np.any(init.values < 0)):
                rep = make_report(
                    State.from_values(st.grid, V), params, opts, total + nits, history, lam,
                    "newton polish converged",
                )
                if rep.converged:
                    return rep
            target *= 0.1
            if target < opts.grad_tol:
                message = "newton polish failed"
                break
            continue
        message = "iteration budget exhausted" if total >= opts.max_iters else "line search stalled"
        break
    return make_report(st, params, opts, total, history, message=message)


@dataclass(frozen=True, eq=False)
class LevelSearch:
    reports: list
    requested: int
    attempts: int

    @property
    def shortfall(self) -> bool:
        return len(self.reports) < self.requested

    def __len__(self):
        return len(self.reports)

    def __iter__(self):
        return iter(self.reports)

    def __getitem__(self, i):
        return self.reports[i]


def orbit_distance(u: State, v: State) -> float:
    """Relative H^1 distance from u to the nearest sign flip of v (same grid)."""
    d = _Deflation([], 0.0, u.grid)
    return math.sqrt(d.closest(u.values, v.values)[0])


def _profile_scale(params: SystemParams, nodes: int) -> tuple[float, float]:
    """(alpha, gamma) placing the scalar profile with ``nodes`` zeros at the synchronized scale."""
    profile = shoot_profile(params.p, nodes=nodes)
    g = make_grid(16384, 40.0)
    mass = float(np.dot(g.weights, profile(g.nodes) ** 2))
    beta_eff, rho_tot = effective_scalar(params)
    if not beta_eff > 0:
        beta_eff = float(np.min(np.diag(params.beta)))
    return rescale_coefficients(params.p, beta_eff, rho_tot, mass)


def _seeds(params, grid, rng, count):
    """Node-bearing and sign-patterned radial seeds for the deflated search.

    The first seeds are scalar ground and one-node profiles at the synchronized
    scale, one per assignment of profiles to components; these are exact solutions
    for symmetric data.  The rest are Gaussians, most of them with a node.
    """
    K = params.K
    r = grid.nodes
    rho_tot = float(np.sqrt(np.sum(params.rho**2)))
    out = []
    profiles = []
    for nodes in (0, 1):
        try:
            alpha, gamma = _profile_scale(params, nodes)
        except NoConvergence:
            break
        profiles.append(alpha * shoot_profile(params.p, nodes=nodes)(gamma * r))
    for pattern in range(1, 2**K):
        if len(profiles) < 2:
            break
        choice = [(pattern >> i) & 1 for i in range(K)]
        out.append(np.stack([profiles[c] * params.rho[i] / rho_tot for i, c in enumerate(choice)]))
    L = 1.0 / _profile_scale(params, 0)[1]
    while len(out) < count:
        widths = L * rng.uniform(0.3, 2.0, K)
        radii = L * rng.uniform(0.3, 3.0, K)
        has_node = rng.random(K) < 0.7
        values = np.exp(-0.5 * (r[None, :] / widths[:, None]) ** 2)
        values = np.where(has_node[:, None], values * (1.0 - (r[None, :] / radii[:, None]) ** 2), values)
        out.append(values)
    return out[:count]


def refine_solution(
    state: State, lam, params: SystemParams, opts: SolveOptions, N: int = 16384, lengths: float = 30.0
) -> SolveReport:
    """Newton polish of a solution on a grid fitted to its own decay rate."""
    lam = np.asarray(lam, dtype=float)
    if not np.all(lam > 0):
        raise NoConvergence("refinement needs positive multipliers (decaying components)")
    grid = make_grid(N, lengths / math.sqrt(float(lam.min())))
    U = np.stack([sample(c, grid.nodes) for c in state.components])
    U = _retract(U, grid, params.rho)
    V, lam, its, ok = _newton(U, lam, grid, params, opts)
    msg = "refined" if ok else "refinement did not converge"
    return make_report(State.from_values(grid, V), params, opts, its, (), lam, msg)


def multi_level_search(
    params: SystemParams,
    m: int,
    opts: SolveOptions | None = None,
    grid: RadialGrid | None = None,
    n_seeds: int = 24,
    refine_N: int = 16384,
) -> LevelSearch:
    """Up to m distinct solution orbits sorted by energy; the first is the ground state.

    Candidates are found by deflated Newton on a shared search grid, distinctness is
    judged there, and each new orbit is then re-solved on a grid fitted to it.
    """
    opts = opts or SolveOptions()
    if m < 1:
        raise InvalidParameter("m must be at least 1")
    grid = grid or suggest_grid(params, 4096)
    ground = minimize_on_SM(params, gaussian_init(params, grid, opts.seed), opts)
    reports = [ground] if ground.converged else []
    if m == 1 or not reports:
        return LevelSearch(reports, m, 1)
    common = ground.state.grid
    found = [ground.state]
    deflation = _Deflation([ground.state.values], opts.deflation_shift, common)
    rng = np.random.default_rng(opts.seed)
    search = replace(opts, grad_tol=1e-8)
    attempts = 1
    for seed_values in _seeds(params, common, rng, n_seeds):
        if len(reports) >= m:
            break
        attempts += 1
        st = State.from_values(common, _retract(seed_values, common, params.rho))
        try:
            st = _interp_project(st, params)
            lam = lagrange_multipliers(st, params)
        except (NoMaximizer, ArithmeticError):
            continue
        V, lam, _, ok = _newton(st.values, lam, common, params, search, deflation)
        if not ok:
            continue
        cand = State.from_values(common, V)
        if any(orbit_distance(cand, f) <= opts.distinct_tol for f in found):
            continue
        found.append(cand)
        deflation.known.append(V)
        try:
            rep = refine_solution(cand, lam, params, opts, refine_N)
        except (NoConvergence, ArithmeticError):
            continue
        if rep.converged:
            reports.append(rep)
    reports.sort(key=lambda r: r.energy)
    return LevelSearch(reports, m, attempts)


def _interp_project(st: State, params: SystemParams) -> State:
    from .functional import project_to_manifold

    return project_to_manifold(st, params, mode="interpolate")


# ---------------------------------------------------------------------------
# coupling sweep


@dataclass(frozen=True)
class SweepRow:
    beta: float
    energy: float
    m_residual: float
    converged: bool
    error: str = ""


@dataclass(frozen=True, eq=False)
class SweepTable:
    rows: tuple
    reports: tuple = field(default=(), repr=False)

    def valid(self):
        return [r for r in self.rows if r.converged]

    def slope(self) -> float:
        """Least-squares slope of log c_1 against log beta over converged rows."""
        rows = self.valid()
        if len(rows) < 2:
            return float("nan")
        x = np.log([r.beta for r in rows])
        y = np.log([r.energy for r in rows])
        return float(np.polyfit(x, y, 1)[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["beta", "energy", "m_residual", "converged"])
        for r in self.rows:
            wr.writerow([repr(r.beta), repr(r.energy), repr(r.m_residual), int(r.converged)])
        return buf.getvalue()


def beta_sweep_c1(
    params_template: SystemParams, beta_values, opts: SolveOptions | None = None, N: int = 2048
) -> SweepTable:
    """Ground energies c_1(beta) along increasing off-diagonal couplings, warm-started."""
    opts = opts or SolveOptions()
    betas = np.asarray(beta_values, dtype=float)
    if params_template.K != 2:
        raise InvalidParameter("the sweep expects a K = 2 template")
    if betas.size == 0 or np.any(betas <= 0) or np.any(np.diff(betas) <= 0):
        raise InvalidParameter("beta values must be positive and increasing")
    rows, reports = [], []
    prev: State | None = None
    for beta in betas:
        params = params_template.with_coupling(beta)
        try:
            init = prev if prev is not None else gaussian_init(params, suggest_grid(params, N), opts.seed)
            rep = minimize_on_SM(params, init, opts)
            rows.append(SweepRow(float(beta), rep.energy, rep.m_residual, rep.converged))
            reports.append(rep)
            if rep.converged:
                prev = rep.state
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            rows.append(SweepRow(float(beta), float("nan"), float("nan"), False, str(exc)))
            reports.append(None)
    return SweepTable(tuple(rows), tuple(reports))


# ---------------------------------------------------------------------------
# repulsive coupling test sequence


@dataclass(frozen=True)
class NonexistenceRow:
    s_n: float
    A: float
    B: float
    s_u: float
    energy: float
    excess: float
    positive: bool


@dataclass(frozen=True, eq=False)
class NonexistenceTable:
    rows: tuple
    c1: float
    slot: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["s_n", "A", "B", "s_u", "energy", "excess", "positive"])
        for r in self.rows:
            wr.writerow([repr(r.s_n), repr(r.A), repr(r.B), repr(r.s_u), repr(r.energy),
                         repr(r.excess), int(r.positive)])
        return buf.getvalue()


def nonexistence_demo(
    params: SystemParams,
    n_steps: int = 16,
    opts: SolveOptions | None = None,
    s_min: float = 1e-3,
    N: int = 8192,
) -> NonexistenceTable:
    """Energies of s_{u^n} * u^n for u^n = (u_1, s_n * u_2, ...), s_n decreasing to s_min.

    u_1 is the normalized scalar state with the smallest decoupled level (placed in
    its own slot), the other slots carry their normalized scalar states dilated by
    s_n.  A and B of u^n are assembled from exact scaling laws; the cross terms
    are integrated on the grid of u_1 with the dilated profiles evaluated there.
    """
    K, p = params.K, params.p
    off = params.beta[~np.eye(K, dtype=bool)]
    if K < 2 or not np.all(off < 0):
        raise InvalidParameter("the test sequence needs K >= 2 and negative off-diagonal couplings")
    if n_steps < 2:
        raise InvalidParameter("n_steps must be at least 2")
    w = solve_kwong(p, make_grid(N, 20.0))
    scalars = [rescale_to_mass(w, params.beta[i, i], params.rho[i]) for i in range(K)]
    levels = np.array([sc.energy for sc in scalars])
    k = int(np.argmin(levels))
    base = scalars[k]
    # put u_1 exactly on the manifold of its own grid
    one = State((base.u,))
    p1 = SystemParams(1, p, [[params.beta[k, k]]], [params.rho[k]])
    s1 = fiber_maximizer(fiber_coefficients(one, p1), p1)
    u1 = dilate_state(one, s1, "regrid")[0]
    c1 = energy(State((u1,)), p1)
    A1 = float(gradient_terms(State((u1,)))[0])
    B11 = params.beta[k, k] * float(np.dot(u1.grid.weights, np.abs(u1.values) ** p))
    others = [i for i in range(K) if i != k]
    e = 1.5 * (p - 2)
    r1 = u1.grid.nodes
    rows = []
    for s in np.geomspace(1.0, s_min, n_steps):
        A = A1
        B = B11
        vals = {}
        for i in others:
            sc = scalars[i]
            A += s**2 * grad_sq_scalar(sc)
            B += s**e * params.beta[i, i] * lp_scalar(sc, p)
            vals[i] = s**1.5 * sc.alpha * w.profile(sc.gamma * s * r1)
        P1 = np.abs(u1.values) ** (p / 2)
        W = u1.grid.weights
        for i in others:
            B += 2.0 * params.beta[k, i] * float(np.dot(W, P1 * np.abs(vals[i]) ** (p / 2)))
            for j in others:
                if j > i:
                    B += 2.0 * params.beta[i, j] * s**e * cross_scalar(scalars[i], scalars[j], p)
        coeffs = FiberCoefficients(A, B)
        if B > 0:
            su = fiber_maximizer(coeffs, params)
            en = reduced_energy_factor(p) * su**2 * A
            rows.append(NonexistenceRow(float(s), A, B, su, en, en - c1, True))
        else:
            rows.append(NonexistenceRow(float(s), A, B, float("nan"), float("nan"), float("nan"), False))
    return NonexistenceTable(tuple(rows), c1, k)


def grad_sq_scalar(sc: NormalizedScalar) -> float:
    return float(gradient_terms(State((sc.u,)))[0])


def lp_scalar(sc: NormalizedScalar, p: float) -> float:
    return float(np.dot(sc.u.grid.weights, np.abs(sc.u.values) ** p))


def cross_scalar(a: NormalizedScalar, b: NormalizedScalar, p: float) -> float:
    """int |a|^{p/2} |b|^{p/2} with b sampled on the grid of a."""
    vb = sample(b.u, a.u.grid.nodes)
    return float(np.dot(a.u.grid.weights, np.abs(a.u.values) ** (p / 2) * np.abs(vb) ** (p / 2)))
