"""Exact finite-horizon planning for post-earthquake grid restoration.

The package builds the reachable decision process for a damaged
distribution system and a set of mobile field teams, solves it exactly by
backward induction, and exposes the result through a CLI and a small REST
service for interactive execution.
"""

from .system_model import (
    DistributionSystem,
    ProblemError,
    derive_travel_matrix,
    load_problem,
    pf_from_fragility,
)
from .energization import (
    U,
    D,
    E,
    attemptable,
    enumerate_outcomes,
    frontier,
    restorable,
    unenergized_count,
)
from .actions import CONTINUE, WAIT, feasible_actions
from .mdp_builder import Mdp, StateCapError, build, longest_horizon
from .solver import Policy, average_expected_cost_per_bus, solve, what_if

__all__ = [
    "DistributionSystem",
    "ProblemError",
    "derive_travel_matrix",
    "load_problem",
    "pf_from_fragility",
    "U",
    "D",
    "E",
    "frontier",
    "restorable",
    "attemptable",
    "enumerate_outcomes",
    "unenergized_count",
    "WAIT",
    "CONTINUE",
    "feasible_actions",
    "Mdp",
    "StateCapError",
    "build",
    "longest_horizon",
    "Policy",
    "solve",
    "what_if",
    "average_expected_cost_per_bus",
]
