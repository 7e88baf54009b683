"""Closed-form existence conditions, lower bounds and small inequalities.

Index sets are 0-based tuples of component indices.  Sums go through math.fsum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameter, TooLargeK
from .functional import SystemParams, reduced_energy_factor

MAX_K = 20
P_SPECIAL_LO = 4.0
P_SPECIAL_HI = 14.0 / 3.0
_P_SLACK = 1e-12


@dataclass(frozen=True)
class ConditionReport:
    lhs: float
    rhs: float
    satisfied: bool
    witness_subset: tuple
    margin: float
    notes: tuple = ()
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "satisfied": self.satisfied,
            "witness_subset": list(self.witness_subset),
            "margin": self.margin,
            "notes": list(self.notes),
        }
        for key, value in self.details.items():
            out[key] = value.to_dict() if isinstance(value, ConditionReport) else value
        return out


def _report(lhs, rhs, witness, notes=(), details=None) -> ConditionReport:
    return ConditionReport(
        lhs=float(lhs),
        rhs=float(rhs),
        satisfied=bool(lhs < rhs),
        witness_subset=tuple(int(i) for i in witness),
        margin=float(rhs - lhs),
        notes=tuple(notes),
        details=details or {},
    )


def _pair_factor(size: int, p: float) -> float:
    return (size - 1) / size ** ((3.0 * p - 10.0) / 4.0)


def _terms(params: SystemParams):
    p = params.p
    d = np.diag(params.beta) * params.rho ** ((6.0 - p) / 2.0)
    o = params.beta * np.outer(params.rho, params.rho) ** ((6.0 - p) / 4.0)
    return d, o


def subset_term(params: SystemParams, subset) -> float:
    """max_{i in I} beta_ii rho_i^{(6-p)/2} + (|I|-1)/|I|^{(3p-10)/4} max_{i != j in I} beta_ij (rho_i rho_j)^{(6-p)/4}."""
    idx = sorted(set(int(i) for i in subset))
    if not idx or idx[0] < 0 or idx[-1] >= params.K:
        raise InvalidParameter(f"invalid index set {subset}")
    d, o = _terms(params)
    D = max(d[i] for i in idx)
    if len(idx) == 1:
        return float(D)
    O = max(o[i, j] for i in idx for j in idx if i < j)
    return float(D + _pair_factor(len(idx), params.p) * O)


def _max_subset_term(params: SystemParams) -> tuple[float, tuple]:
    """Maximum of subset_term over 1 <= |I| <= K-1, by dynamic programming over bitmasks."""
    K = params.K
    if K > MAX_K:
        raise TooLargeK(f"subset enumeration is limited to K <= {MAX_K}, got {K}")
    if K < 2:
        raise InvalidParameter("the condition needs K >= 2")
    d, o = _terms(params)
    n = 1 << K
    D = np.full(n, -np.inf)
    O = np.full(n, -np.inf)
    size = np.zeros(n, dtype=int)
    for b in range(K):
        lo, hi = 1 << b, 1 << (b + 1)
        rest = np.arange(hi - lo)
        D[lo:hi] = np.maximum(D[rest], d[b])
        size[lo:hi] = size[rest] + 1
        # Q[rest] = max_{j in rest} o[b, j]
        Q = np.full(lo, -np.inf)
        for c in range(b):
            a0, a1 = 1 << c, 1 << (c + 1)
            Q[a0:a1] = np.maximum(Q[: a1 - a0], o[b, c])
        O[lo:hi] = np.maximum(O[rest], Q)
    masks = np.arange(1, n - 1)
    factors = np.array([0.0] + [_pair_factor(k, params.p) for k in range(1, K + 1)])
    sz = size[masks]
    pairs = np.where(sz == 1, 0.0, O[masks])
    T = D[masks] + factors[sz] * pairs
    k = int(np.argmax(T))
    mask = int(masks[k])
    witness = tuple(i for i in range(K) if (mask >> i) & 1)
    # recompute on the witness so the reported value is reproducible on its own
    return subset_term(params, witness), witness


def coupling_sum(params: SystemParams) -> float:
    """sum_{i,j} beta_ij (rho_i rho_j)^{p/2}."""
    rr = np.outer(params.rho, params.rho) ** (params.p / 2.0)
    return math.fsum((params.beta * rr).ravel())


def _mass_power(params: SystemParams) -> float:
    return math.fsum(params.rho**2) ** (0.75 * (params.p - 2.0))


def _hypothesis_notes(params: SystemParams) -> list:
    notes = []
    if not (P_SPECIAL_LO - _P_SLACK <= params.p <= P_SPECIAL_HI + _P_SLACK):
        notes.append(f"p = {params.p:g} lies outside [4, 14/3]; the existence statement does not apply")
    if not np.all(params.beta > 0):
        notes.append("some couplings are not positive; the existence statement does not apply")
    return notes


def check_betacond(params: SystemParams) -> ConditionReport:
    """max over I of subset_term(I) < sum beta_ij (rho_i rho_j)^{p/2} / (sum rho_i^2)^{3(p-2)/4}."""
    lhs, witness = _max_subset_term(params)
    rhs = coupling_sum(params) / _mass_power(params)
    return _report(lhs, rhs, witness, _hypothesis_notes(params))


def _check_special_p(p: float) -> None:
    if not (P_SPECIAL_LO - _P_SLACK <= p <= P_SPECIAL_HI + _P_SLACK):
        raise InvalidParameter(f"p must lie in [4, 14/3], got {p}")


def sufficient_K_inequality(K: int, p: float) -> ConditionReport:
    """(K-2) K^{(3p-10)/4} < (K-1)^{(3p-6)/4}."""
    lhs = (K - 2) * K ** ((3.0 * p - 10.0) / 4.0)
    rhs = (K - 1) ** ((3.0 * p - 6.0) / 4.0)
    return _report(lhs, rhs, ())


def check_uniform_special(K: int, p: float, beta_diag, beta_off: float) -> ConditionReport:
    """The condition for equal masses and equal off-diagonal coupling, divided by beta.

    The report compares max_I ((1/beta) max_{i in I} beta_ii + (|I|-1)/|I|^{(3p-10)/4})
    with ((1/beta) sum_i beta_ii + K(K-1)) / K^{3(p-2)/4}; ``details["sufficient"]``
    holds the K-only inequality that implies it for large beta.
    """
    _check_special_p(p)
    if K < 2:
        raise InvalidParameter("K must be at least 2")
    if K > MAX_K:
        raise TooLargeK(f"subset enumeration is limited to K <= {MAX_K}, got {K}")
    if not beta_off > 0:
        raise InvalidParameter("beta_off must be positive")
    bd = np.broadcast_to(np.asarray(beta_diag, dtype=float), (K,)).copy()
    if not np.all(bd > 0):
        raise InvalidParameter("beta_diag must be positive")
    ratio = bd / beta_off
    best, witness = -np.inf, ()
    # for fixed size the best subset contains the largest diagonal entries
    order = np.argsort(-ratio, kind="stable")
    for size in range(1, K):
        chosen = tuple(sorted(int(i) for i in order[:size]))
        val = ratio[order[0]] + _pair_factor(size, p)
        if val > best:
            best, witness = val, chosen
    rhs = (math.fsum(ratio) + K * (K - 1)) / K ** (0.75 * (p - 2.0))
    return _report(best, rhs, witness, details={"sufficient": sufficient_K_inequality(K, p)})


def check_c0_condition(params: SystemParams, m: int, theta_m: float, C_p: float) -> ConditionReport:
    """The level condition with a caller-supplied Theta_m, multiplied through by the coupling ratio.

    lhs = max_I subset_term(I),
    rhs = Theta_m^{-(3p-10)/4} C_p^{-p} sum beta_ij (rho_i rho_j)^{p/2} / (sum rho_i^2)^{3(p-2)/4},
    which is the original inequality times a positive factor; with Theta_1 the report
    coincides with check_betacond.
    """
    if m < 1:
        raise InvalidParameter("m must be at least 1")
    if not theta_m > 0:
        raise InvalidParameter("theta_m must be positive")
    if not C_p > 0:
        raise InvalidParameter("C_p must be positive")
    p = params.p
    lhs, witness = _max_subset_term(params)
    factor = theta_m ** (-(3.0 * p - 10.0) / 4.0) * C_p ** (-p)
    rhs = factor * coupling_sum(params) / _mass_power(params)
    notes = _hypothesis_notes(params)
    return _report(lhs, rhs, witness, notes, {"m": m, "theta_factor": factor})


def coupling_threshold(params: SystemParams, evaluate=check_betacond, hi: float = 1e6) -> float:
    """Smallest common off-diagonal beta at which ``evaluate`` holds (margin crosses zero)."""

    def margin(b):
        return evaluate(params.with_coupling(b)).margin

    if params.K == 2 and evaluate is check_betacond:
        # the left side does not depend on beta_12 when K = 2
        lhs = _max_subset_term(params)[0]
        r1, r2 = params.rho
        p = params.p
        fixed = params.beta[0, 0] * r1**p + params.beta[1, 1] * r2**p
        return (lhs * _mass_power(params) - fixed) / (2.0 * (r1 * r2) ** (p / 2))
    lo = 0.0
    if margin(lo) > 0:
        return 0.0
    if margin(hi) <= 0:
        raise InvalidParameter("condition does not hold below the search limit")
    return brentq(margin, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def ground_lower_bound(params: SystemParams, subset, C_p: float) -> float:
    """Lower bound for the infimum of J over the sub-system on the index set ``subset``."""
    idx = tuple(sorted(set(int(i) for i in subset)))
    K, p = params.K, params.p
    upper = max(K - 1, 1)
    if not 1 <= len(idx) <= upper:
        raise InvalidParameter(f"|I| must lie in [1, {upper}], got {len(idx)}")
    if not 10.0 / 3.0 < p <= P_SPECIAL_HI + _P_SLACK:
        raise InvalidParameter(f"p must lie in (10/3, 14/3], got {p}")
    if not C_p > 0:
        raise InvalidParameter("C_p must be positive")
    T = subset_term(params, idx)
    base = 3.0 * (p - 2.0) / (2.0 * p) * C_p**p * T
    return reduced_energy_factor(p) * base ** (-4.0 / (3.0 * p - 10.0))


def power_mean_sides(a, alpha: float, q: float):
    """((lhs1, rhs1), (lhs2, rhs2)) of the two power-mean inequalities."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise InvalidParameter("need a vector with at least two entries")
    if not np.all(a > 0):
        raise InvalidParameter("entries must be positive")
    if not alpha >= 2:
        raise InvalidParameter("alpha must be at least 2")
    if not q >= 1:
        raise InvalidParameter("q must be at least 1")
    m = a.size
    lhs1 = math.fsum(a**alpha) ** (1.0 / alpha)
    rhs1 = math.fsum(a**2) ** 0.5
    s1 = math.fsum(a)
    cross = s1 * s1 - math.fsum(a * a)
    lhs2 = (max(cross, 0.0) / (m * (m - 1))) ** 0.5
    rhs2 = (math.fsum(a**q) / m) ** (1.0 / q)
    return (lhs1, rhs1), (lhs2, rhs2)


def power_mean_checks(a, alpha: float, q: float, rel_tol: float = 1e-12) -> bool:
    """Both inequalities, allowing ``rel_tol`` relative rounding slack (equality cases)."""
    (l1, r1), (l2, r2) = power_mean_sides(a, alpha, q)
    return l1 <= r1 * (1 + rel_tol) and l2 <= r2 * (1 + rel_tol)


def power_mean_violations(a: np.ndarray, alpha: np.ndarray, q: np.ndarray, rel_tol: float = 1e-12) -> int:
    """Vectorized count of rows of ``a`` violating either inequality."""
    a = np.asarray(a, dtype=float)
    alpha = np.asarray(alpha, dtype=float)[:, None]
    q = np.asarray(q, dtype=float)[:, None]
    m = a.shape[1]
    lhs1 = np.sum(a**alpha, axis=1) ** (1.0 / alpha[:, 0])
    rhs1 = np.sqrt(np.sum(a**2, axis=1))
    cross = np.sum(a, axis=1) ** 2 - np.sum(a**2, axis=1)
    lhs2 = np.sqrt(np.maximum(cross, 0.0) / (m * (m - 1)))
    rhs2 = (np.sum(a**q, axis=1) / m) ** (1.0 / q[:, 0])
    bad = (lhs1 > rhs1 * (1 + rel_tol)) | (lhs2 > rhs2 * (1 + rel_tol))
    return int(np.count_nonzero(bad))


def genus_product_spheres(dims) -> int:
    """Genus of S^{m_1 - 1} x ... x S^{m_k - 1}, which is min m_i."""
    dims = [int(d) for d in dims]
    if not dims:
        raise InvalidParameter("dims must be nonempty")
    if min(dims) < 1:
        raise InvalidParameter("sphere dimensions m_i must be at least 1")
    return min(dims)
