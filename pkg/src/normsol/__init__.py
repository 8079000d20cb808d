"""Positive normalized solutions of -Delta u + lambda u = u^-r + u^(p-1) with u = 0 on the boundary."""

from .config import Config, load_config
from .continuation import (
    ContinuationLog,
    ContinuationRecord,
    SolveResult,
    SweepEntry,
    continue_to_limit,
    eps_schedule,
    sweep_rho,
)
from .core import DomainSpec, Field, Grid, Params, build_grid, grad_norm_sq, l2_norm, lp_integral, mass, neg_laplacian
from .eigen import EigenPair, first_eigenpair
from .energy import EnergyBreakdown, j_eps, j_eps_gradient, residual_norm
from .errors import (
    CannotNormalize,
    ConfigError,
    ConvergenceError,
    DomainError,
    GeometryInadmissible,
    GridMismatch,
    InvalidResolution,
    LineSearchStall,
    NormsolError,
    ParameterError,
    RegimeError,
    SingularityError,
    WitnessFailure,
)
from .geometry import GeometryReport, estimate_gn_constant, find_rho0, g_critical, geometry_report, rho0_estimate
from .minimizer import (
    MinimizeOptions,
    MinimizeResult,
    eigenfunction_pairing_check,
    extract_lambda,
    lambda_window_check,
    minimize_j_eps,
    negative_energy_witness,
    project_constraint,
)
from .verify import LemmaEntry, LemmaReport, positivity_check, verify_all

__version__ = "0.1.0"

__all__ = [
    "CannotNormalize",
    "Config",
    "ConfigError",
    "ContinuationLog",
    "ContinuationRecord",
    "ConvergenceError",
    "DomainError",
    "DomainSpec",
    "EigenPair",
    "EnergyBreakdown",
    "Field",
    "GeometryInadmissible",
    "GeometryReport",
    "Grid",
    "GridMismatch",
    "InvalidResolution",
    "LemmaEntry",
    "LemmaReport",
    "LineSearchStall",
    "MinimizeOptions",
    "MinimizeResult",
    "NormsolError",
    "ParameterError",
    "Params",
    "RegimeError",
    "SingularityError",
    "SolveResult",
    "SweepEntry",
    "WitnessFailure",
    "build_grid",
    "continue_to_limit",
    "eigenfunction_pairing_check",
    "eps_schedule",
    "estimate_gn_constant",
    "extract_lambda",
    "find_rho0",
    "first_eigenpair",
    "g_critical",
    "geometry_report",
    "grad_norm_sq",
    "j_eps",
    "j_eps_gradient",
    "l2_norm",
    "lambda_window_check",
    "load_config",
    "lp_integral",
    "mass",
    "minimize_j_eps",
    "neg_laplacian",
    "negative_energy_witness",
    "positivity_check",
    "project_constraint",
    "residual_norm",
    "rho0_estimate",
    "sweep_rho",
    "verify_all",
]
