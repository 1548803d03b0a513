from __future__ import annotations

from .config import (
    DissipationMode,
    FieldState,
    FirstStepTerms,
    SchemeCase,
    SchemeConfig,
    SchemeWeights,
    TimeMode,
    default_safety_factor,
    parse_scheme,
)
from .convergence import (
    ConvergenceRecord,
    StepRecord,
    run_convergence,
    simulate_standing_wave,
    standing_wave,
)
from .overset import (
    SpieStepper,
    advance_spie,
    apply_constraints,
    constraint_matrix,
    first_step,
    initial_state,
    stage_rows,
)
from .periodic import (
    PeriodicGrid1D,
    PeriodicStepper,
    advance_monolithic_uw,
    advance_periodic,
    periodic_first_step,
)
from .solve import LinearSolver, solve_implicit

__all__ = [
    "ConvergenceRecord",
    "DissipationMode",
    "FieldState",
    "FirstStepTerms",
    "LinearSolver",
    "PeriodicGrid1D",
    "PeriodicStepper",
    "SchemeCase",
    "SchemeConfig",
    "SchemeWeights",
    "SpieStepper",
    "StepRecord",
    "TimeMode",
    "advance_monolithic_uw",
    "advance_periodic",
    "advance_spie",
    "apply_constraints",
    "constraint_matrix",
    "default_safety_factor",
    "first_step",
    "initial_state",
    "parse_scheme",
    "periodic_first_step",
    "run_convergence",
    "simulate_standing_wave",
    "solve_implicit",
    "stage_rows",
    "standing_wave",
]
