"""Radial discretization of R^3.

A radial function u(|x|) is sampled on nodes 0 = r_0 < r_1 < ... < r_{N-1} = r_max
and extended by zero beyond r_max.  Three objects carry the discretization:

* quadrature weights w_j with sum_j w_j f(r_j) ~ 4 pi int_0^R f(r) r^2 dr,
* a symmetric positive semidefinite stiffness matrix S with u^T S u ~ int |grad u|^2,
* the Laplacian, defined as -W^{-1} S u so that <Lap u, v>_w = -u^T S v exactly.

On uniform grids S is the fourth-order form on v = r u (the radial reduction),
mirrored oddly through r = 0; graded grids use a second-order difference form.
The node at r = 0 carries zero weight and does not enter S.  Its value only matters
for interpolation and is kept consistent through :func:`regularize_origin`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import PchipInterpolator

from .errors import InvalidParameter

FOUR_PI = 4.0 * np.pi
GRADED_SLOPE = 0.25  # r(t) = R (a t + (1 - a) t^3); spacing ratio end/origin = (3 - 2a)/a

# Gregory end correction of the trapezoid rule (second-order end derivative)
_GREGORY_END = np.array([23.0 / 24.0, 7.0 / 6.0, 3.0 / 8.0])


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    weights: np.ndarray
    r_max: float
    kind: str

    @property
    def N(self) -> int:
        return self.nodes.size

    @property
    def spacing(self) -> float:
        """Uniform spacing (or the mean spacing of a graded grid)."""
        return self.r_max / (self.N - 1)

    def descriptor(self) -> dict:
        return {"N": int(self.N), "r_max": float(self.r_max), "kind": self.kind}

    def scaled(self, factor: float) -> "RadialGrid":
        """The same grid stretched by ``factor`` (nodes r_j -> factor * r_j)."""
        return make_grid(self.N, self.r_max * factor, self.kind)

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        if self.kind == "uniform":
            return _uniform_stiffness(self.nodes, self.r_max)
        return _graded_stiffness(self.N, self.r_max)

    @cached_property
    def stiffness_banded(self) -> np.ndarray:
        """Upper banded storage of ``stiffness[1:, 1:]`` for ``scipy.linalg.solveh_banded``."""
        S = self.stiffness[1:, 1:].tocsr()
        ab = np.zeros((3, S.shape[0]))
        for k in range(3):
            diag = S.diagonal(k)
            ab[2 - k, k:] = diag
        return ab

    def __repr__(self) -> str:
        return f"RadialGrid(N={self.N}, r_max={self.r_max:g}, kind={self.kind!r})"


@dataclass(frozen=True, eq=False)
class RadialField:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.N,):
            raise InvalidParameter(f"field has shape {values.shape}, grid has N={self.grid.N}")
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("field values must be finite")
        object.__setattr__(self, "values", values)

    def __neg__(self) -> "RadialField":
        return RadialField(self.grid, -self.values)

    def __mul__(self, c: float) -> "RadialField":
        return RadialField(self.grid, c * self.values)

    __rmul__ = __mul__


def make_grid(N: int, r_max: float, kind: str = "uniform") -> RadialGrid:
    if N < 16:
        raise InvalidParameter(f"N must be at least 16, got {N}")
    if not r_max > 0:
        raise InvalidParameter(f"r_max must be positive, got {r_max}")
    if kind == "uniform":
        nodes = np.linspace(0.0, r_max, N)
        h = r_max / (N - 1)
        c = np.ones(N)
        c[-1] = 0.5
        c[-3:] = _GREGORY_END
        weights = FOUR_PI * h * nodes**2 * c
    elif kind == "graded":
        t = np.linspace(0.0, 1.0, N)
        dt = 1.0 / (N - 1)
        nodes = _graded_map(t, r_max)
        nodes[-1] = r_max
        c = np.ones(N)
        c[-3:] = _GREGORY_END
        weights = FOUR_PI * dt * nodes**2 * _graded_slope(t, r_max) * c
        # trapezoid in t is exact up to O(dt^4) here; put the remainder on the last node
        weights[-1] += FOUR_PI * r_max**3 / 3.0 - weights.sum()
    else:
        raise InvalidParameter(f"unknown grid kind {kind!r}")
    return RadialGrid(nodes=nodes, weights=weights, r_max=float(r_max), kind=kind)


def _graded_map(t, r_max):
    a = GRADED_SLOPE
    return r_max * (a * t + (1.0 - a) * t**3)


def _graded_slope(t, r_max):
    a = GRADED_SLOPE
    return r_max * (a + 3.0 * (1.0 - a) * t**2)


def _uniform_stiffness(r: np.ndarray, r_max: float) -> sp.csr_matrix:
    # Q(v) = (1/h)[4/3 sum (dv_h)^2 - 1/12 sum (dv_2h)^2 - v_1^2/6 - (v_n - v_{n-1})^2/6]
    # approximates int_0^R v'^2; with v = r u, int r^2 u'^2 = Q(v) - R u(R)^2.
    N = r.size
    h = r_max / (N - 1)
    eye = sp.identity(N, format="csr")
    D1 = eye[1:] - eye[:-1]
    D2 = eye[2:] - eye[:-2]
    end = (eye[N - 1] - eye[N - 2]).T
    first = eye[1].T
    Sv = (4.0 / 3.0) * (D1.T @ D1) - (1.0 / 12.0) * (D2.T @ D2)
    Sv = Sv - (first @ first.T) / 6.0 - (end @ end.T) / 6.0
    R = sp.diags(r)
    S = (FOUR_PI / h) * (R @ Sv @ R)
    S = S - sp.csr_matrix(([FOUR_PI * r_max], ([N - 1], [N - 1])), shape=(N, N))
    return sp.csr_matrix(S)


def _graded_stiffness(N: int, r_max: float) -> sp.csr_matrix:
    t = np.linspace(0.0, 1.0, N)
    dt = 1.0 / (N - 1)
    g = _graded_map(t, r_max)
    g[-1] = r_max
    gp_mid = _graded_slope(0.5 * (t[1:] + t[:-1]), r_max)
    c = g[:-1] * g[1:] / gp_mid
    eye = sp.identity(N, format="csr")
    D1 = eye[1:] - eye[:-1]
    return sp.csr_matrix((FOUR_PI / dt) * (D1.T @ sp.diags(c) @ D1))


def integrate(f: RadialField | np.ndarray, grid: RadialGrid | None = None) -> float:
    """Quadrature of a radial function over the ball of radius r_max."""
    if isinstance(f, RadialField):
        return float(np.dot(f.grid.weights, f.values))
    return float(np.dot(grid.weights, f))


def grad_norm_sq(f: RadialField) -> float:
    """Discrete int_{R^3} |grad f|^2 dx."""
    # S annihilates constants; shifting by the boundary value removes cancellation error
    u = f.values - f.values[-1]
    return float(u @ (f.grid.stiffness @ u))


def regularize_origin(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Set u(0) from the even fit a + b r^2 + c r^4 through nodes 1..3 (u'(0) = 0)."""
    values = np.array(values, dtype=float, copy=True)
    r2 = nodes[1:4] ** 2
    V = np.stack([np.ones(3), r2, r2**2], axis=1)
    coef = np.linalg.solve(V, values[..., 1:4].T)
    values[..., 0] = coef[0]
    return values


def laplacian_values(u: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Discrete Laplacian of one or several sampled fields (last axis = nodes)."""
    u = np.asarray(u, dtype=float)
    flat = u.reshape(-1, grid.N)
    flat = flat - flat[:, -1:]
    Su = (grid.stiffness @ flat.T).T
    out = np.empty_like(flat)
    out[:, 1:] = -Su[:, 1:] / grid.weights[1:]
    # 3 u''(0) from the even quartic through nodes 0..2
    r1, r2 = grid.nodes[1], grid.nodes[2]
    M = np.array([[r1**2, r1**4], [r2**2, r2**4]])
    rhs = np.stack([flat[:, 1] - flat[:, 0], flat[:, 2] - flat[:, 0]])
    b = np.linalg.solve(M, rhs)[0]
    out[:, 0] = 6.0 * b
    return out.reshape(u.shape)


def apply_radial_laplacian(f: RadialField) -> RadialField:
    return RadialField(f.grid, laplacian_values(f.values, f.grid))


def interpolant(f: RadialField) -> PchipInterpolator:
    """Monotone cubic interpolant of the even extension of f (so u'(0) = 0)."""
    r = f.grid.nodes
    x = np.concatenate([-r[:0:-1], r])
    y = np.concatenate([f.values[:0:-1], f.values])
    # flat stretches (e.g. exact zeros) trigger harmless divide warnings inside scipy
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return PchipInterpolator(x, y, extrapolate=False)


def sample(f: RadialField, points: np.ndarray) -> np.ndarray:
    """Evaluate the interpolant of f at radii ``points``; zero beyond r_max."""
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = interpolant(f)(np.asarray(points, dtype=float))
    return np.nan_to_num(out, nan=0.0)


def resample(f: RadialField, grid: RadialGrid) -> RadialField:
    return RadialField(grid, sample(f, grid.nodes))


def dilate(f: RadialField, s: float) -> RadialField:
    """s * u (x) = s^{3/2} u(s x), sampled back onto the grid of f."""
    if not s > 0:
        raise InvalidParameter(f"dilation factor must be positive, got {s}")
    if s == 1.0:
        return RadialField(f.grid, f.values.copy())
    return RadialField(f.grid, s**1.5 * sample(f, s * f.grid.nodes))


def dilate_by_regrid(f: RadialField, s: float) -> RadialField:
    """s * u represented exactly: values s^{3/2} u_j on the nodes r_j / s."""
    if not s > 0:
        raise InvalidParameter(f"dilation factor must be positive, got {s}")
    return RadialField(f.grid.scaled(1.0 / s), s**1.5 * f.values)


def field_to_csv(f: RadialField, path: str | Path | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["r", "value"])
    for r, v in zip(f.grid.nodes, f.values):
        writer.writerow([repr(float(r)), repr(float(v))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def field_from_csv(text: str, grid: RadialGrid) -> RadialField:
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != ["r", "value"]:
        raise InvalidParameter("field CSV must start with header 'r,value'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    if data.shape[0] != grid.N or not np.allclose(data[:, 0], grid.nodes, rtol=1e-12, atol=1e-14):
        raise InvalidParameter("field CSV nodes do not match the grid")
    return RadialField(grid, data[:, 1])


def grid_from_descriptor(desc: dict) -> RadialGrid:
    return make_grid(int(desc["N"]), float(desc["r_max"]), desc.get("kind", "uniform"))
