"""Collision-avoiding multi-agent trajectories on R^n and S^2."""

from ._core import (
    DomainError,
    Error,
    InfeasibleError,
    InputError,
    NumericError,
    ParseError,
    PotentialFamily,
    PotentialParams,
    PreconditionError,
    RecipeError,
    Scenario,
    SingularityError,
    bundled_scenario,
    dist,
    exp_map,
    exp_rotation,
    load_scenario,
    log_map,
    log_rotation,
    parse_scenario,
)

__all__ = [
    "DomainError",
    "Error",
    "InfeasibleError",
    "InputError",
    "NumericError",
    "ParseError",
    "PotentialFamily",
    "PotentialParams",
    "PreconditionError",
    "RecipeError",
    "Scenario",
    "SingularityError",
    "bundled_scenario",
    "dist",
    "exp_map",
    "exp_rotation",
    "load_scenario",
    "log_map",
    "log_rotation",
    "parse_scenario",
]
