"""Acceptance criteria as plain functions, shared by the test suite and the CLI.

Each criterion returns a :class:`CriterionResult` carrying the measured quantities,
the tolerance they were compared against, and the wall time.  Frozen regression
constants live in :data:`FROZEN`; every criterion reads them through its ``frozen``
argument so a perturbed table affects only the criteria that use the entry.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from decimal import Decimal, localcontext

import numpy as np

from . import conditions as cond
from .functional import (
    State,
    SystemParams,
    dilate_state,
    energy,
    fiber_coefficients,
    fiber_derivative_sign,
    fiber_maximizer,
    mass_vector,
    nehari_pohozaev,
    project_to_manifold,
)
from .grid import RadialField, dilate, grad_norm_sq, integrate, make_grid
from .soliton import (
    default_soliton_grid,
    discrete_ground_state,
    gn_constant,
    rescale_to_mass,
    solve_kwong,
    theta_1,
)
from .solver import (
    SolveOptions,
    beta_sweep_c1,
    gaussian_init,
    minimize_on_SM,
    multi_level_search,
    nonexistence_demo,
    suggest_grid,
)
from .spectral import (
    RadialPotential,
    _tridiagonal,
    morse_index_component,
    negative_count_ell,
    square_well,
    sturm_count,
)

FROZEN = {
    "kwong_w0_p4": 4.337387679977,
    "morse_index_K1": 1,
    "beta_star_K2": math.sqrt(2.0) - 1.0,
}

QUICK = (1, 2, 3, 4, 5, 7, 9, 10)
FULL = tuple(range(1, 11))


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    seconds: float = 0.0
    limit_seconds: float = float("inf")
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.cid:2d} {self.name} ({self.seconds:.2f} s)"


def _finish(cid, name, checks: dict, details: dict, t0: float, limit: float) -> CriterionResult:
    seconds = time.perf_counter() - t0
    checks = dict(checks)
    checks["runtime"] = seconds < limit
    details = dict(details, checks={k: bool(v) for k, v in checks.items()})
    return CriterionResult(cid, name, all(checks.values()), seconds, limit, details)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------------------


def criterion_1(frozen=FROZEN) -> CriterionResult:
    """Dilation scaling laws on N = 4096, r_max = 30."""
    t0 = time.perf_counter()
    grid = make_grid(4096, 30.0)
    r = grid.nodes
    f = RadialField(grid, np.exp(-0.5 * r**2) * (1.0 + 0.3 * r**2))
    mass0 = integrate(RadialField(grid, f.values**2))
    grad0 = grad_norm_sq(f)
    worst = 0.0
    for p in (3.5, 4.0, 5.0):
        lp0 = integrate(RadialField(grid, np.abs(f.values) ** p))
        for s in (0.25, 0.5, 2.0, 4.0):
            g = dilate(f, s)
            errs = (
                _rel(integrate(RadialField(grid, g.values**2)), mass0),
                _rel(grad_norm_sq(g), s**2 * grad0),
                _rel(integrate(RadialField(grid, np.abs(g.values) ** p)), s ** (1.5 * (p - 2)) * lp0),
            )
            worst = max(worst, *errs)
    return _finish(1, "dilation scaling laws", {"scaling": worst <= 1e-5},
                   {"max_rel_error": worst, "tol": 1e-5}, t0, 5.0)


def criterion_2(frozen=FROZEN) -> CriterionResult:
    """Ground state soliton for p = 4."""
    t0 = time.perf_counter()
    sol = solve_kwong(4.0, default_soliton_grid())
    ode = sol.ode_residual()
    coarse = discrete_ground_state(4.0, make_grid(4096, 20.0)).values[0]
    fine = discrete_ground_state(4.0, make_grid(8192, 20.0)).values[0]
    refine = abs(coarse - fine)
    frozen_err = abs(sol.w0 - frozen["kwong_w0_p4"])
    checks = {
        "ode": ode < 1e-8,
        "nehari": sol.nehari_residual < 1e-6,
        "pohozaev": sol.pohozaev_residual < 1e-6,
        "refinement": refine < 1e-6,
        "frozen_w0": frozen_err < 1e-9,
    }
    details = {
        "w0": sol.w0,
        "ode_residual": ode,
        "nehari_residual": sol.nehari_residual,
        "pohozaev_residual": sol.pohozaev_residual,
        "w0_refinement_diff": refine,
        "w0_frozen_diff": frozen_err,
    }
    return _finish(2, "soliton p = 4", checks, details, t0, 5.0)


def _golden_max(A: float, B: float, p: float, lo: float, hi: float) -> float:
    """Golden-section maximizer of A s^2/2 - B s^e / p evaluated in 40-digit decimals."""
    with localcontext() as ctx:
        ctx.prec = 40
        A, B, P = Decimal(A), Decimal(B), Decimal(p)
        e = Decimal(3) * (P - 2) / 2

        def phi(s):
            return A * s * s / 2 - B * (e * s.ln()).exp() / P

        invphi = (Decimal(5).sqrt() - 1) / 2
        a, b = Decimal(lo), Decimal(hi)
        c, d = b - invphi * (b - a), a + invphi * (b - a)
        fc, fd = phi(c), phi(d)
        while b - a > Decimal("1e-30") * b:
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = phi(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = phi(d)
        return float((a + b) / 2)


def _random_state(rng, grid, p, target_su):
    """K = 2 sum of Gaussians, amplitude tuned so that s_u equals target_su."""
    r = grid.nodes
    vals = []
    for _ in range(2):
        width = rng.uniform(0.8, 2.0)
        bump = rng.uniform(-0.5, 0.5) * np.exp(-((r - rng.uniform(0.5, 2.0)) ** 2) / width**2)
        vals.append(np.exp(-(r**2) / width**2) + bump)
    beta = np.array([[rng.uniform(0.5, 2.0), 0.0], [0.0, rng.uniform(0.5, 2.0)]])
    beta[0, 1] = beta[1, 0] = rng.uniform(-0.3, 2.0)
    params = SystemParams(2, p, beta, [1.0, 1.0])
    u = State.from_values(grid, np.array(vals))
    su = fiber_maximizer(fiber_coefficients(u, params), params)
    # s_u scales like amp^{-2(p-2)/(3p-10)}
    amp = (target_su / su) ** (-(3 * p - 10) / (2 * (p - 2)))
    return State.from_values(grid, amp * np.array(vals)), params


def criterion_3(frozen=FROZEN, n_states: int = 50, seed: int = 3) -> CriterionResult:
    """Closed-form fiber maximizer, manifold projection, sign pattern."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    grid = make_grid(4096, 30.0)
    worst_su = worst_m = 0.0
    signs_ok = True
    for _ in range(n_states):
        p = float(rng.choice([3.5, 4.0, 14.0 / 3.0, 5.0]))
        u, params = _random_state(rng, grid, p, rng.uniform(0.6, 1.6))
        coeffs = fiber_coefficients(u, params)
        su = fiber_maximizer(coeffs, params)
        golden = _golden_max(coeffs.A, coeffs.B, p, su / 8, su * 8)
        worst_su = max(worst_su, _rel(su, golden))
        proj = project_to_manifold(u, params)
        A = float(np.sum(fiber_coefficients(proj, params).A))
        worst_m = max(worst_m, abs(nehari_pohozaev(proj, params)) / A)
        for s, sign in ((0.5 * su, 1.0), (2.0 * su, -1.0)):
            closed = fiber_derivative_sign(coeffs, s, params)
            # M(s * u) through an actual dilation of the sampled state
            sampled = nehari_pohozaev(dilate_state(u, s), params)
            signs_ok &= np.sign(closed) == sign and np.sign(sampled) == sign
    checks = {"maximizer": worst_su <= 1e-8, "projection": worst_m <= 1e-9, "sign_pattern": signs_ok}
    details = {"max_rel_su_error": worst_su, "max_rel_M_after_projection": worst_m, "n_states": n_states}
    return _finish(3, "fiber maximizer", checks, details, t0, 30.0)


def _ground_reference(params: SystemParams) -> float:
    w = solve_kwong(params.p, default_soliton_grid())
    return rescale_to_mass(w, params.beta[0, 0], params.rho[0]).energy


def criterion_4(frozen=FROZEN, n_seeds: int = 5) -> CriterionResult:
    """K = 1 ground state energy against the rescaled soliton."""
    t0 = time.perf_counter()
    params = SystemParams(1, 4.0, [[1.0]], [1.0])
    ref = _ground_reference(params)
    grid = suggest_grid(params)
    errors, converged = [], True
    for seed in range(n_seeds):
        rep = minimize_on_SM(params, gaussian_init(params, grid, seed), SolveOptions(seed=seed))
        converged &= rep.converged
        errors.append(_rel(rep.energy, ref))
    checks = {"energy": max(errors) <= 1e-4, "converged": converged}
    details = {"reference_energy": ref, "rel_errors": errors}
    return _finish(4, "K = 1 consistency", checks, details, t0, 60.0)


def criterion_5(frozen=FROZEN) -> CriterionResult:
    """Attractive K = 2 ground state below the decoupled levels."""
    t0 = time.perf_counter()
    params = SystemParams(2, 4.0, [[1.0, 5.0], [5.0, 1.0]], [1.0, 1.0])
    grid = suggest_grid(params)
    rep = minimize_on_SM(params, gaussian_init(params, grid, 0), SolveOptions())
    U = rep.state.values
    peak = np.max(np.abs(U), axis=1)
    # nonnegative everywhere up to roundoff, strictly positive on an inner region
    r = grid.nodes
    nonneg = bool(np.all(U >= -1e-12 * peak[:, None]))
    region = [float(r[np.argmax(u < 1e-8 * m)]) if np.any(u < 1e-8 * m) else float(r[-1])
              for u, m in zip(U, peak)]
    c0 = float(min(_ground_reference(SystemParams(1, 4.0, [[1.0]], [rho])) for rho in params.rho))
    residuals = {
        "m": rep.m_residual,
        "nehari": rep.nehari_res,
        "pohozaev": rep.pohozaev_res,
        "euler_lagrange": rep.el_res,
    }
    checks = {
        "converged": rep.converged,
        "nonnegative": nonneg,
        "positivity_region": min(region) >= 0.25 * grid.r_max,
        "below_c0": rep.energy < c0,
        "residuals": max(residuals.values()) <= 1e-5,
        "multipliers": bool(np.all(rep.lam > 0)),
    }
    details = {"energy": rep.energy, "c0": c0, "lambda": rep.lam.tolist(),
               "positivity_radius": region, "r_max": grid.r_max, "residuals": residuals}
    return _finish(5, "attractive ground state", checks, details, t0, 120.0)


def criterion_6(frozen=FROZEN) -> CriterionResult:
    """Decay of c_1 along large couplings."""
    t0 = time.perf_counter()
    template = SystemParams(2, 4.0, [[1.0, 100.0], [100.0, 1.0]], [1.0, 1.0])
    betas = 10.0 ** np.array([2.0, 2.5, 3.0, 3.5, 4.0])
    table = beta_sweep_c1(template, betas, SolveOptions())
    energies = [r.energy for r in table.rows]
    slope = table.slope()
    checks = {
        "converged": all(r.converged for r in table.rows),
        "slope": slope <= -1.8,
        "monotone": bool(np.all(np.diff(energies) < 0)),
    }
    details = {"betas": betas.tolist(), "energies": energies, "slope": slope}
    return _finish(6, "coupling decay", checks, details, t0, 600.0)


def criterion_7(frozen=FROZEN) -> CriterionResult:
    """Repulsive coupling: the test sequence approaches c_1 from above."""
    t0 = time.perf_counter()
    params = SystemParams(2, 4.0, [[1.0, -1.0], [-1.0, 1.0]], [1.0, 1.0])
    table = nonexistence_demo(params)
    rows = [r for r in table.rows if r.positive]
    last = rows[-1]
    energies = np.array([r.energy for r in rows])
    checks = {
        "approach": last.excess / table.c1 <= 1e-3,
        "above": bool(np.all(energies > table.c1)),
        "decreasing": bool(np.all(np.diff(energies) < 0)),
        "s_u": abs(last.s_u - 1.0) <= 1e-3,
    }
    details = {"c1": table.c1, "last_rel_excess": last.excess / table.c1, "last_s_u": last.s_u,
               "rows": len(table.rows), "positive_rows": len(rows)}
    return _finish(7, "repulsive nonexistence", checks, details, t0, 120.0)


def criterion_8(frozen=FROZEN) -> CriterionResult:
    """Two distinct orbits for a strongly attractive symmetric pair."""
    t0 = time.perf_counter()
    params = SystemParams(2, 4.0, [[1.0, 50.0], [50.0, 1.0]], [1.0, 1.0])
    opts = SolveOptions()
    search = multi_level_search(params, 2, opts)
    c0 = float(min(_ground_reference(SystemParams(1, 4.0, [[1.0]], [rho])) for rho in params.rho))
    energies = [rep.energy for rep in search]
    ok_res = all(
        rep.converged and rep.m_residual <= opts.m_tol
        and max(rep.nehari_res, rep.pohozaev_res) <= 10 * opts.grad_tol
        for rep in search
    )
    checks = {
        "two_orbits": len(search) == 2,
        "ordered": len(energies) == 2 and energies[0] < energies[1],
        "below_c0": bool(energies) and max(energies) < c0,
        "residuals": ok_res,
    }
    details = {"energies": energies, "c0": c0, "attempts": search.attempts}
    return _finish(8, "two levels", checks, details, t0, 600.0)


def criterion_9(frozen=FROZEN, n_random: int = 20, seed: int = 9) -> CriterionResult:
    """Negative eigenvalue counting."""
    t0 = time.perf_counter()
    # square well of radius a: a bound state appears at depth (pi / 2a)^2
    a = 1.0
    grid = make_grid(4000, 50.0)
    crit = (math.pi / (2 * a)) ** 2
    below = negative_count_ell(square_well(grid, 0.9 * crit, a), 0)
    above = negative_count_ell(square_well(grid, 1.1 * crit, a), 0)
    rng = np.random.default_rng(seed)
    small = make_grid(256, 10.0)
    agree = 0
    for _ in range(n_random):
        values = -rng.uniform(0, 40) * np.exp(-small.nodes**2 / rng.uniform(0.5, 4.0))
        W = RadialPotential(RadialField(small, values + rng.normal(0, 2.0, small.N)))
        ell = int(rng.integers(0, 3))
        diag, off = _tridiagonal(W, ell)
        dense = int(np.sum(np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)) < 0))
        agree += sturm_count(diag, off, 0.0) == dense
    params = SystemParams(1, 4.0, [[1.0]], [1.0])
    rep = minimize_on_SM(params, gaussian_init(params, suggest_grid(params), 0), SolveOptions())
    morse = morse_index_component(rep.state, 0, params)
    checks = {
        "well_below": below == 0,
        "well_above": above == 1,
        "sturm_vs_dense": agree == n_random,
        "morse_K1": morse == frozen["morse_index_K1"],
    }
    details = {"well_counts": [below, above], "agreements": agree, "morse_index": morse}
    return _finish(9, "spectral counting", checks, details, t0, 60.0)


def criterion_10(frozen=FROZEN, n_fuzz: int = 100_000, seed: int = 10) -> CriterionResult:
    """Existence-condition arithmetic."""
    t0 = time.perf_counter()
    params = SystemParams(2, 4.0, [[1.0, 0.5], [0.5, 1.0]], [1.0, 1.0])
    threshold = cond.coupling_threshold(params)
    thr_err = abs(threshold - frozen["beta_star_K2"])
    # m = 1: (betacond) and the level condition with theta_1 from the exact C_p
    C_p = gn_constant(4.0, solve_kwong(4.0, default_soliton_grid()))
    rng = np.random.default_rng(seed)
    equiv = 0.0
    for _ in range(20):
        b = rng.uniform(0.2, 3.0, 3)
        pr = SystemParams(2, float(rng.choice([4.0, 13.0 / 3.0, 14.0 / 3.0])),
                          [[b[0], b[2]], [b[2], b[1]]], rng.uniform(0.5, 2.0, 2))
        C = gn_constant(pr.p, solve_kwong(pr.p, default_soliton_grid()))
        r1 = cond.check_betacond(pr)
        r2 = cond.check_c0_condition(pr, 1, theta_1(pr.p, C), C)
        equiv = max(equiv, abs(r1.margin - r2.margin) / max(abs(r1.lhs), abs(r1.rhs)))
        if r1.satisfied != r2.satisfied:
            equiv = float("inf")
    table = {
        (K, p): cond.sufficient_K_inequality(K, p).satisfied
        for K in range(2, 7)
        for p in (4.0, 13.0 / 3.0, 14.0 / 3.0)
    }
    n = rng.integers(2, 8, n_fuzz)
    violations = 0
    for size in np.unique(n):
        rows = int(np.sum(n == size))
        a = np.exp(rng.uniform(-8.0, 3.0, (rows, size)))
        # constant rows are the equality cases of the second inequality
        flat = rng.random(rows) < 0.1
        a[flat] = a[flat, :1]
        alpha = rng.uniform(2.0, 8.0, rows)
        q = rng.uniform(1.0, 6.0, rows)
        violations += cond.power_mean_violations(a, alpha, q)
    checks = {
        "threshold": thr_err <= 1e-12,
        "m1_equivalence": equiv <= 1e-10,
        "K_table": all(table.values()),
        "fuzz": violations == 0,
    }
    details = {"threshold": threshold, "threshold_error": thr_err, "C_p": C_p,
               "m1_max_rel_margin_diff": equiv, "fuzz_violations": int(violations),
               "fuzz_samples": n_fuzz}
    return _finish(10, "condition arithmetic", checks, details, t0, 30.0)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_criteria(ids, frozen=FROZEN) -> list:
    """Run the selected criteria; an exception counts as a failure of that criterion only."""
    out = []
    for cid in ids:
        t0 = time.perf_counter()
        try:
            out.append(CRITERIA[cid](frozen=frozen))
        except Exception as exc:  # noqa: BLE001 - isolate criteria from each other
            out.append(CriterionResult(cid, CRITERIA[cid].__doc__.strip().rstrip("."), False,
                                       time.perf_counter() - t0,
                                       details={"error": f"{type(exc).__name__}: {exc}"}))
    return out
