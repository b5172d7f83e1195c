"""Split a system into self-contained groups and solve them separately.

Groups must be disjoint, cover every bus, and each carry at least one
source and one team.  Branches crossing group boundaries are severed: the
group solves ignore them, and the report lists every one so the operator
knows which couplings the decomposition gave up.
"""

from __future__ import annotations

import math
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mdp_builder import build, flags_label, longest_horizon
from .solver import solve
from .system_model import DistributionSystem, ProblemError


@dataclass(frozen=True)
class PartitionGroup:
    name: str
    buses: tuple      # 0-based, sorted
    team_starts: tuple


def partition_groups(doc, system):
    """Parse and validate the 'partitions' array of a problem document."""
    raw = doc.get("partitions")
    if raw is None:
        raise ProblemError("problem document has no 'partitions' array")
    if not isinstance(raw, list) or not raw:
        raise ProblemError("'partitions' must be a non-empty array of groups")
    groups = []
    names = set()
    claimed = {}
    for pos, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ProblemError("each partition must be an object")
        name = entry.get("name") or f"group{pos + 1}"
        if name in names:
            raise ProblemError(f"partition name {name!r} appears more than once")
        names.add(name)
        buses = entry.get("buses")
        if not isinstance(buses, list) or not buses:
            raise ProblemError(f"partition {name!r} needs a non-empty 'buses' array")
        zero_based = []
        for b in buses:
            if not isinstance(b, int) or not 1 <= b <= system.bus_count:
                raise ProblemError(f"partition {name!r}: {b!r} is not a bus id")
            if b - 1 in claimed:
                raise ProblemError(
                    f"bus {b} belongs to both {claimed[b - 1]!r} and {name!r}, partitions must be disjoint"
                )
            claimed[b - 1] = name
            zero_based.append(b - 1)
        teams = entry.get("teams")
        if not isinstance(teams, list) or not teams:
            raise ProblemError(f"partition {name!r} needs at least one team")
        starts = []
        for b in teams:
            if b not in buses:
                raise ProblemError(f"partition {name!r}: team start {b!r} must be one of its buses")
            starts.append(b - 1)
        if not any(b in system.sources for b in zero_based):
            raise ProblemError(f"partition {name!r} contains no source bus")
        groups.append(PartitionGroup(name, tuple(sorted(zero_based)), tuple(starts)))
    if len(claimed) != system.bus_count:
        missing = sorted(set(range(system.bus_count)) - set(claimed))
        raise ProblemError(f"partitions must cover every bus, missing bus {missing[0] + 1}")
    return groups


def severed_branches(system, groups):
    """Branches whose endpoints sit in different groups, 0-based pairs."""
    owner = {}
    for g in groups:
        for b in g.buses:
            owner[b] = g.name
    return tuple((i, j) for i, j in system.branches if owner[i] != owner[j])


def induce_subsystem(system, group):
    """Restrict the system to one group, reindexing buses densely."""
    remap = {old: new for new, old in enumerate(group.buses)}
    branches = tuple(
        (remap[i], remap[j])
        for i, j in system.branches
        if i in remap and j in remap
    )
    sub = DistributionSystem(
        bus_count=len(group.buses),
        branches=branches,
        sources=frozenset(remap[b] for b in system.sources if b in remap),
        pf=tuple(system.pf[b] for b in group.buses),
        travel=np.ascontiguousarray(system.travel[np.ix_(group.buses, group.buses)]),
        team_starts=tuple(remap[b] for b in group.team_starts),
        coords=tuple(system.coords[b] for b in group.buses) if system.coords else None,
        name=f"{system.name or 'system'}/{group.name}",
    )
    return sub, remap


@dataclass
class GroupResult:
    name: str
    buses: tuple
    states: int
    transitions: int
    horizon: int
    value: float
    seconds: float


@dataclass
class PartitionReport:
    flags: str
    horizon: int
    groups: list
    severed: tuple
    warnings: list
    total_value: float

    def to_document(self):
        return {
            "flags": self.flags,
            "horizon": self.horizon,
            "total_value": self.total_value,
            "severed_branches": [[i + 1, j + 1] for i, j in self.severed],
            "warnings": list(self.warnings),
            "groups": [
                {
                    "name": g.name,
                    "buses": [b + 1 for b in g.buses],
                    "states": g.states,
                    "transitions": g.transitions,
                    "horizon": g.horizon,
                    "value": g.value,
                    "seconds": round(g.seconds, 6),
                }
                for g in self.groups
            ],
        }


def solve_partitioned(system, groups, flags="", horizon="auto", max_states=None,
                      backend=None, workers=None):
    """Build and solve every group, sharing one horizon across them.

    With ``horizon="auto"`` the shared horizon is the largest per-group
    auto horizon, so group values stay comparable and summable.  Groups
    are independent, so they build and solve concurrently; ``workers``
    caps the pool (default: one per group).
    """
    def build_one(group):
        sub, _ = induce_subsystem(system, group)
        t0 = _time.perf_counter()
        mdp = build(sub, flags, max_states=max_states)
        return group, mdp, _time.perf_counter() - t0

    pool_size = max(1, min(workers or len(groups), len(groups)))
    with ThreadPoolExecutor(max_workers=pool_size) as pool:
        built = list(pool.map(build_one, groups))

        if horizon in ("auto", None):
            shared = max(max(1, longest_horizon(mdp)) for _, mdp, _ in built)
        else:
            shared = int(horizon)

        policies = list(
            pool.map(lambda item: solve(item[1], horizon=shared, backend=backend), built)
        )

    results = []
    for (group, mdp, build_seconds), policy in zip(built, policies):
        results.append(
            GroupResult(
                name=group.name,
                buses=group.buses,
                states=mdp.state_count,
                transitions=mdp.transition_count,
                horizon=shared,
                value=float(policy.values[0]),
                seconds=build_seconds + policy.solve_seconds,
            )
        )

    severed = severed_branches(system, groups)
    owner = {}
    for g in groups:
        for b in g.buses:
            owner[b] = g.name
    warnings = [
        f"branch {i + 1}-{j + 1} crosses groups {owner[i]}/{owner[j]} and is ignored by every group solve"
        for i, j in severed
    ]
    return PartitionReport(
        flags=flags_label(flags),
        horizon=shared,
        groups=results,
        severed=severed,
        warnings=warnings,
        total_value=math.fsum(r.value for r in results),
    )
