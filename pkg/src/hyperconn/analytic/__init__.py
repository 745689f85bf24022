"""Scalar evaluation of every closed-form and implicitly defined quantity."""

from .fixed_point import (
    BranchingPoint,
    FixedPoint,
    branching_mean,
    critical_degree,
    mean_degree,
    mean_degree_log,
    solve_xi_from_d,
    solve_xi_from_dbar,
    xi_expansion,
    xi_expansion_gap,
    xi_second_coefficient,
)
from .formulas import (
    CountForm,
    LltParameters,
    LogEstimate,
    Regime,
    conn_prefactor,
    conn_rate,
    conn_rate_expansion,
    conn_rate_expansion_gap,
    conn_rate_rho_form,
    conn_rate_series,
    conn_rate_xi_form,
    llt_parameters,
    log_connected_count,
    log_connectivity,
    sparse_prefactor_limit,
)
from . import bcm

__all__ = [
    "BranchingPoint",
    "FixedPoint",
    "CountForm",
    "LltParameters",
    "LogEstimate",
    "Regime",
    "bcm",
    "branching_mean",
    "conn_prefactor",
    "conn_rate",
    "conn_rate_expansion",
    "conn_rate_expansion_gap",
    "conn_rate_rho_form",
    "conn_rate_series",
    "conn_rate_xi_form",
    "critical_degree",
    "llt_parameters",
    "log_connected_count",
    "log_connectivity",
    "mean_degree",
    "mean_degree_log",
    "solve_xi_from_d",
    "solve_xi_from_dbar",
    "sparse_prefactor_limit",
    "xi_expansion",
    "xi_expansion_gap",
    "xi_second_coefficient",
]
