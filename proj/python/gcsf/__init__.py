"""Curvature flow simulation and blow-up diagnostics."""

from ._core import (
    SCHEMA_VERSION,
    GcsfError,
    blowup_functional,
    closure_residual,
    compute_geometry,
    derivative,
    fit_decay_rate,
    gage_hamilton_ratio,
    inequality_suite,
    initial_profile,
    integrate,
    lq_norm,
    normalized_deviation,
    rescale,
    rhs_physical,
    rhs_rescaled,
    run_command,
    run_physical,
    run_rescaled,
    solve_support,
    stable_dt,
    verify,
)

__all__ = [
    "SCHEMA_VERSION",
    "GcsfError",
    "blowup_functional",
    "closure_residual",
    "compute_geometry",
    "derivative",
    "fit_decay_rate",
    "gage_hamilton_ratio",
    "inequality_suite",
    "initial_profile",
    "integrate",
    "lq_norm",
    "normalized_deviation",
    "rescale",
    "rhs_physical",
    "rhs_rescaled",
    "run_command",
    "run_physical",
    "run_rescaled",
    "solve_support",
    "stable_dt",
    "verify",
]
