"""Robust multiobjective steepest descent over finite scenario sets."""

from ._owrc import (
    CheckError,
    FormatError,
    LineSearchError,
    Problem,
    SolverConfig,
    SubproblemSolution,
    Trace,
    armijo_search,
    builtin_problem,
    builtin_problems,
    cli,
    diagnostics,
    load_problem,
    load_trace,
    parse_problem,
    phi_star,
    quadratic_problem,
    run,
    solve_subproblem,
)

__all__ = [
    "CheckError",
    "FormatError",
    "LineSearchError",
    "Problem",
    "SolverConfig",
    "SubproblemSolution",
    "Trace",
    "armijo_search",
    "builtin_problem",
    "builtin_problems",
    "cli",
    "diagnostics",
    "load_problem",
    "load_trace",
    "parse_problem",
    "phi_star",
    "quadratic_problem",
    "run",
    "solve_subproblem",
]
