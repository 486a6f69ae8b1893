"""Constrained HMC and GHMC on embedded manifolds (Python bindings)."""

from ._core import (
    ExperimentConfig,
    Model,
    PhasePoint,
    RattleConfig,
    circle_multiplier,
    cli_main,
    make_model,
    model_names,
    newton_project,
    psi_rev,
    psi_rev_k,
    rattle_step,
    run_histogram,
    run_rejection_table,
    run_residence_sweep,
    run_trajectory,
    torus_phi_density,
)

__all__ = [
    "ExperimentConfig",
    "Model",
    "PhasePoint",
    "RattleConfig",
    "circle_multiplier",
    "cli_main",
    "make_model",
    "model_names",
    "newton_project",
    "psi_rev",
    "psi_rev_k",
    "rattle_step",
    "run_histogram",
    "run_rejection_table",
    "run_residence_sweep",
    "run_trajectory",
    "torus_phi_density",
]
