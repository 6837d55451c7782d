"""Delayed evolutionary dynamics in population games with revision-rate tuning."""

from popdyn._core import (
    CertifiedConstants,
    Game,
    abs_diff_delays,
    compute_constants,
    edm_field,
    epsilon,
    epsilon_bar,
    estimate_bound_df,
    grad_x_storage,
    linear_game,
    max_valid_rho,
    nash_distance,
    ne_residual,
    rps_game,
    run_baseline,
    simulate,
    simulate_file,
    storage,
    verify_contractive,
)

__all__ = [
    "CertifiedConstants",
    "Game",
    "abs_diff_delays",
    "compute_constants",
    "edm_field",
    "epsilon",
    "epsilon_bar",
    "estimate_bound_df",
    "grad_x_storage",
    "linear_game",
    "max_valid_rho",
    "nash_distance",
    "ne_residual",
    "rps_game",
    "run_baseline",
    "simulate",
    "simulate_file",
    "storage",
    "verify_contractive",
]
