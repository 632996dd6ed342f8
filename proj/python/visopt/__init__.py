"""Sensor-pose visibility optimization over synthetic scenes.

Thin wrapper around the compiled core: scenario IO, the smooth
visibility objective and its analytic gradient, gradient-ascent
optimization, the discrete candidate grid with its visibility matrix
and solvers, and integer evaluation reports.
"""

from ._core import (
    BudgetError,
    CandidateGrid,
    CanonicalPose,
    IPSolution,
    ParseError,
    PreconditionError,
    RailPose,
    Scenario,
    StopRule,
    VisibilityMatrix,
    build_candidates,
    build_vismatrix,
    evaluate,
    evaluate_canonical,
    generate_scenario,
    gradient,
    load_scenario,
    objective,
    optimize,
    save_scenario,
    solve_exhaustive,
    solve_mcmc,
    solve_naive,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "CandidateGrid",
    "CanonicalPose",
    "IPSolution",
    "ParseError",
    "PreconditionError",
    "RailPose",
    "Scenario",
    "StopRule",
    "VisibilityMatrix",
    "build_candidates",
    "build_vismatrix",
    "evaluate",
    "evaluate_canonical",
    "generate_scenario",
    "gradient",
    "load_scenario",
    "objective",
    "optimize",
    "save_scenario",
    "solve_exhaustive",
    "solve_mcmc",
    "solve_naive",
]
