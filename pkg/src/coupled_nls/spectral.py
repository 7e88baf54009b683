"""Negative spectrum of radial Schroedinger operators -Lap + W on R^3.

With v = r u and angular momentum l, -Lap + W becomes -v'' + l(l+1)/r^2 v + W v on
(0, r_max) with v(0) = v(r_max) = 0.  The three-point discretization is a symmetric
tridiagonal matrix, so eigenvalues below a level are counted exactly by the signs of
the pivots in its LDL^T factorization (Sturm sequence).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .functional import State, SystemParams, lagrange_multipliers
from .grid import RadialField, RadialGrid, integrate

DEFAULT_ELL_MAX = 8
# the CLR constant is not fixed by anything used here; reports carry the raw integral
DEFAULT_CLR_CONSTANT = 1.0
CLR_PROVENANCE = "unsourced"


@dataclass(frozen=True, eq=False)
class RadialPotential:
    W: RadialField

    @property
    def grid(self) -> RadialGrid:
        return self.W.grid


@dataclass(frozen=True, eq=False)
class SpectralReport:
    neg_count: int
    ell0_count: int
    counts_by_ell: tuple
    lowest_eigs: np.ndarray
    clr_integral: float
    clr_constant: float = DEFAULT_CLR_CONSTANT
    clr_provenance: str = CLR_PROVENANCE
    truncation_suspect: bool = False

    @property
    def clr_ratio(self) -> float:
        """neg_count / clr_integral (inf when the integral vanishes but states exist)."""
        if self.clr_integral == 0:
            return 0.0 if self.neg_count == 0 else float("inf")
        return self.neg_count / self.clr_integral

    @property
    def clr_bound(self) -> float:
        return self.clr_constant * self.clr_integral

    def to_dict(self) -> dict:
        return {
            "neg_count": self.neg_count,
            "ell0_count": self.ell0_count,
            "counts_by_ell": list(self.counts_by_ell),
            "lowest_eigs": [float(x) for x in self.lowest_eigs],
            "clr_integral": self.clr_integral,
            "clr_constant": self.clr_constant,
            "clr_provenance": self.clr_provenance,
            "clr_ratio": self.clr_ratio,
            "truncation_suspect": self.truncation_suspect,
        }


def morse_potential(u: State, i: int, params: SystemParams) -> RadialPotential:
    """W = -(p-1) beta_ii |u_i|^{p-2} - (p-2)/2 sum_{j != i} beta_ij |u_i|^{p/2-2} |u_j|^{p/2}."""
    p = params.p
    if p < 4:
        raise InvalidParameter(f"the Morse potential needs p >= 4, got {p}")
    if not 0 <= i < params.K:
        raise InvalidParameter(f"component index {i} out of range")
    if u.K != params.K:
        raise InvalidParameter("state and params disagree on K")
    U = np.abs(u.values)
    W = -(p - 1) * params.beta[i, i] * U[i] ** (p - 2)
    # |u_i|^{p/2-2} is |u_i|^0 = 1 when p = 4
    base = np.ones_like(U[i]) if p == 4 else U[i] ** (p / 2 - 2)
    for j in range(params.K):
        if j != i:
            W = W - 0.5 * (p - 2) * params.beta[i, j] * base * U[j] ** (p / 2)
    return RadialPotential(RadialField(u.grid, W))


def _tridiagonal(W: RadialPotential, ell: int, shift: float = 0.0):
    """Symmetric tridiagonal (diag, offdiag) for the interior nodes 1..N-2.

    Nonuniform grids use the mass-lumped form, symmetrized by the square root of the
    lumped mass; this keeps the inertia and makes the eigenvalues those of the
    generalized problem.
    """
    r = W.grid.nodes
    h = np.diff(r)
    ri = r[1:-1]
    hl, hr = h[:-1], h[1:]
    mass = 0.5 * (hl + hr)
    k_diag = 1.0 / hl + 1.0 / hr
    k_off = -1.0 / h[1:-1]
    pot = ell * (ell + 1) / ri**2 + W.W.values[1:-1] + shift
    scale = 1.0 / np.sqrt(mass)
    diag = k_diag / mass + pot
    off = k_off * scale[:-1] * scale[1:]
    return diag, off


def sturm_count(diag: np.ndarray, off: np.ndarray, x: float) -> int:
    """Number of eigenvalues < x of the symmetric tridiagonal matrix (diag, off)."""
    count = 0
    q = 1.0
    off2 = (off * off).tolist()
    tiny = np.finfo(float).tiny
    for k, d in enumerate(diag.tolist()):
        q = d - x - (off2[k - 1] / q if k > 0 else 0.0)
        if q == 0.0:
            q = -tiny
        if q < 0:
            count += 1
    return count


def _lowest_eigenvalues(diag, off, n: int, tol: float = 1e-12) -> np.ndarray:
    """The n smallest eigenvalues by Sturm bisection (Gershgorin bracket)."""
    n = min(n, diag.size)
    radius = np.zeros_like(diag)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    lo0, hi0 = float(np.min(diag - radius)), float(np.max(diag + radius))
    out = np.empty(n)
    for k in range(n):
        lo, hi = lo0, hi0
        while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
            mid = 0.5 * (lo + hi)
            if sturm_count(diag, off, mid) > k:
                hi = mid
            else:
                lo = mid
        out[k] = 0.5 * (lo + hi)
    return out


def negative_count_ell(W: RadialPotential, ell: int, shift: float = 0.0) -> int:
    diag, off = _tridiagonal(W, ell, shift)
    return sturm_count(diag, off, 0.0)


def count_negative_eigenvalues(
    W: RadialPotential,
    ell_max: int = DEFAULT_ELL_MAX,
    clr_constant: float = DEFAULT_CLR_CONSTANT,
    n_lowest: int = 5,
    shift: float = 0.0,
) -> SpectralReport:
    """Negative eigenvalues of -Lap + W + shift counted with multiplicity 2l+1 for l <= ell_max."""
    if ell_max < 0:
        raise InvalidParameter("ell_max must be nonnegative")
    counts = []
    for ell in range(ell_max + 1):
        counts.append(negative_count_ell(W, ell, shift))
    total = sum((2 * ell + 1) * c for ell, c in enumerate(counts))
    suspect = counts[-1] > 0
    if suspect:
        warnings.warn(
            f"l = {ell_max} still has {counts[-1]} negative eigenvalues; raise ell_max",
            RuntimeWarning,
            stacklevel=2,
        )
    diag, off = _tridiagonal(W, 0, shift)
    lowest = _lowest_eigenvalues(diag, off, n_lowest)
    return SpectralReport(
        neg_count=total,
        ell0_count=counts[0],
        counts_by_ell=tuple(counts),
        lowest_eigs=lowest,
        clr_integral=clr_integral(W),
        clr_constant=clr_constant,
        truncation_suspect=suspect,
    )


def clr_integral(W: RadialPotential) -> float:
    """int |W^-|^{3/2} dx."""
    neg = np.minimum(W.W.values, 0.0)
    return integrate(RadialField(W.grid, np.abs(neg) ** 1.5))


def morse_index_component(
    state: State,
    i: int,
    params: SystemParams,
    ell_max: int = DEFAULT_ELL_MAX,
    with_multiplier: bool = False,
) -> int:
    """Radial Morse index of v -> J(.., v, ..) at v = u_i: the l = 0 count of -Lap + W_i.

    ``with_multiplier=True`` counts -Lap + lambda_i + W_i instead, the second variation
    of J + lambda_i |u_i|^2 / 2.
    """
    if np.all(state.values[i] == 0):
        return 0
    W = morse_potential(state, i, params)
    shift = float(lagrange_multipliers(state, params)[i]) if with_multiplier else 0.0
    return negative_count_ell(W, 0, shift)


def morse_indices(state: State, params: SystemParams, ell_max: int = DEFAULT_ELL_MAX) -> tuple:
    return tuple(morse_index_component(state, i, params, ell_max) for i in range(params.K))


def shell_maxima(u: State, n_shells: int = 4) -> np.ndarray:
    """max |u_i(r)| r over dyadic shells (r_max 2^{-k-1}, r_max 2^{-k}], innermost first."""
    r = u.grid.nodes
    R = u.grid.r_max
    out = np.zeros((u.K, n_shells))
    for col, k in enumerate(range(n_shells - 1, -1, -1)):
        mask = (r > R * 2.0 ** (-k - 1)) & (r <= R * 2.0 ** (-k))
        out[:, col] = np.max(np.abs(u.values[:, mask]) * r[mask], axis=1)
    return out


def decay_check(u: State) -> np.ndarray:
    """Per component max of |u_i(r)| r over the outer half of the grid."""
    return shell_maxima(u, 1)[:, 0]


def square_well(grid: RadialGrid, depth: float, radius: float) -> RadialPotential:
    """W = -depth on r < radius, 0 outside."""
    values = np.where(grid.nodes < radius, -float(depth), 0.0)
    return RadialPotential(RadialField(grid, values))
