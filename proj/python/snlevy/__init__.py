"""Branching spectrally negative Levy processes: scale functions, simulation, tail fits."""

from ._core import (
    ArgumentError,
    DomainError,
    FitError,
    JumpComponent,
    LevyModel,
    RegimeError,
    chi,
    classify_regime,
    critical_point,
    critical_scaling,
    esscher_tilt,
    exit_functionals,
    hill_estimator,
    log_grid,
    mean_progeny,
    phi_roots,
    psi,
    resolvent_density,
    second_moment_barrier,
    simulate,
    survival_curve,
    synthetic_critical,
    synthetic_pareto,
    tail_slope,
    tilted_w,
    verify,
    w_numeric,
    w_q,
    z_q,
)

__all__ = [name for name in dir() if not name.startswith("_")]
