"""Deterministic-importance variance reduction for 2-D multigroup Monte Carlo."""

from ._core import (
    CompareReport,
    CompareRow,
    ImportanceMap,
    ParseError,
    ProblemModel,
    Quadrature,
    SolveReport,
    SolveResult,
    SolverError,
    Tally,
    ValidationError,
    VrResult,
    build_quadrature,
    builtin_problem,
    builtin_problem_names,
    cadis_params,
    fom,
    load_deck,
    make_vr,
    omega_flux,
    parse_deck,
    read_importance_map,
    response,
    run_compare,
    run_histories,
    solve,
    write_deck,
    write_importance_map,
)

__all__ = [name for name in dir() if not name.startswith("_")]
