"""Normalized solutions of K coupled cubic-type Schroedinger equations on R^3 (radial)."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    CoupledNLSError,
    CriteriaFailed,
    DegenerateComponent,
    InvalidParameter,
    NoConvergence,
    NoMaximizer,
    ShapeMismatch,
    TooLargeK,
)
from .grid import RadialField, RadialGrid, integrate, grad_norm_sq, make_grid
from .functional import (
    FiberCoefficients,
    State,
    SystemParams,
    energy,
    fiber_coefficients,
    fiber_maximizer,
    nehari_pohozaev,
    project_to_manifold,
)
from .soliton import ScalarSoliton, gn_constant, rescale_to_mass, solve_kwong, theta_1
from .solver import (
    SolveOptions,
    SolveReport,
    beta_sweep_c1,
    minimize_on_SM,
    multi_level_search,
    nonexistence_demo,
)
from .spectral import SpectralReport, count_negative_eigenvalues, morse_index_component
from .conditions import ConditionReport, check_betacond, check_c0_condition, check_uniform_special

__all__ = [name for name in dir() if not name.startswith("_")]
