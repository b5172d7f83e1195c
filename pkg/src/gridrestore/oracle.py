"""Independent reference implementation for equivalence testing.

Deliberately naive: unit-duration steps, no reductions, no team-order
canonicalization, dict state tables, compensated sums.  It shares only the
system container and the energization kernels with the optimized path, so
agreement between the two is meaningful evidence, not an echo.
"""

from __future__ import annotations

import math
import random
from itertools import product

from .energization import U, attemptable, enumerate_outcomes, frontier, restorable, unenergized_count
from .system_model import load_problem

STATE_GUARD = 2_000_000


def _naive_actions(system, statuses, teams, front, rest):
    per = []
    for dest, remaining in teams:
        if remaining > 0:
            per.append((("continue",),))
            continue
        options = []
        if dest in rest:
            options.append(("wait",))
        options.extend(("goto", j) for j in sorted(rest) if j != dest)
        per.append(tuple(options))
    joint = []
    for combo in product(*per):
        progress = False
        for cmd, (dest, _) in zip(combo, teams):
            if cmd[0] == "wait" or cmd[0] == "continue":
                progress = progress or dest in front
            else:
                progress = progress or cmd[1] in front
        if progress:
            joint.append(combo)
    return joint


def naive_process(system, state_guard=STATE_GUARD):
    """Exhaustive unit-step process: state list plus per-state entries.

    Entry shapes: ``("terminal", rate)``, ``("cascade", transitions)`` for
    the automatic attempts at the start, and ``("choice", rate, per_action)``
    otherwise, where transitions are (successor, probability) lists.
    """
    statuses0 = (U,) * system.bus_count
    teams0 = tuple((b, 0) for b in system.team_starts)
    states = [(statuses0, teams0)]
    index = {states[0]: 0}
    entries = []

    def intern(statuses, teams):
        key = (statuses, teams)
        k = index.get(key)
        if k is None:
            k = len(states)
            if k >= state_guard:
                raise RuntimeError(f"oracle state guard of {state_guard} states exceeded")
            index[key] = k
            states.append(key)
        return k

    k = 0
    while k < len(states):
        statuses, teams = states[k]
        front = frontier(system, statuses)
        positions = frozenset(d for d, r in teams if r == 0)
        if k == 0 and attemptable(system, statuses, positions):
            merged = {}
            for succ, p in enumerate_outcomes(system, statuses, positions):
                j = intern(succ, teams)
                merged[j] = merged.get(j, 0.0) + p
            entries.append(("cascade", sorted(merged.items())))
            k += 1
            continue
        if not front:
            entries.append(("terminal", unenergized_count(statuses)))
            k += 1
            continue
        rest = restorable(system, statuses)
        per_action = []
        for action in _naive_actions(system, statuses, teams, front, rest):
            moved = []
            for cmd, (dest, rem) in zip(action, teams):
                if cmd[0] == "wait":
                    moved.append((dest, rem))
                elif cmd[0] == "continue":
                    moved.append((dest, rem - 1))
                else:
                    moved.append((cmd[1], system.time(dest, cmd[1]) - 1))
            moved = tuple(moved)
            hits = frozenset(d for d, r in moved if r == 0)
            merged = {}
            for succ, p in enumerate_outcomes(system, statuses, hits):
                j = intern(succ, moved)
                merged[j] = merged.get(j, 0.0) + p
            per_action.append(sorted(merged.items()))
        entries.append(("choice", unenergized_count(statuses), per_action))
        k += 1
    return states, entries


def naive_values(entries, horizon):
    """Textbook backward induction, one unit step per layer."""
    count = len(entries)
    values = [0.0] * count
    for _ in range(horizon):
        nxt = [0.0] * count
        cascades = []
        for k, entry in enumerate(entries):
            kind = entry[0]
            if kind == "terminal":
                nxt[k] = entry[1] + values[k]
            elif kind == "choice":
                _, rate, per_action = entry
                nxt[k] = min(
                    rate + math.fsum(p * values[j] for j, p in transitions)
                    for transitions in per_action
                )
            else:
                cascades.append(k)
        for k in cascades:
            # the cascade takes no time: it reads the layer being written
            nxt[k] = math.fsum(p * nxt[j] for j, p in entries[k][1])
        values = nxt
    return values


def naive_longest_horizon(entries):
    """Longest root-to-terminal path in unit steps (cascade edges are free)."""
    count = len(entries)
    edges = []
    for k, entry in enumerate(entries):
        if entry[0] == "terminal":
            continue
        duration = 0 if entry[0] == "cascade" else 1
        groups = [entry[1]] if entry[0] == "cascade" else entry[2]
        for transitions in groups:
            for j, _ in transitions:
                if j != k:
                    edges.append((k, j, duration))
    indegree = [0] * count
    for _, j, _ in edges:
        indegree[j] += 1
    out = [[] for _ in range(count)]
    for k, j, d in edges:
        out[k].append((j, d))
    order = [k for k in range(count) if indegree[k] == 0]
    dist = [0] * count
    head = 0
    while head < len(order):
        k = order[head]
        head += 1
        for j, d in out[k]:
            if dist[k] + d > dist[j]:
                dist[j] = dist[k] + d
            indegree[j] -= 1
            if indegree[j] == 0:
                order.append(j)
    if len(order) != count:
        raise RuntimeError("oracle transition graph has a cycle")
    return max(
        (dist[k] for k, entry in enumerate(entries) if entry[0] == "terminal"),
        default=0,
    )


def oracle_value(system, horizon):
    """Reference initial expected cost at the given horizon."""
    _, entries = naive_process(system)
    return naive_values(entries, horizon)[0]


def random_instance(seed, max_buses=7, max_teams=2):
    """Small random planning instance, loader-validated.

    A connected random tree plus up to two extra branches, coordinates on
    a small grid (so travel times stay short), failure probabilities from
    {0, 0.25, 0.5, 1}.  Returns (system, document).
    """
    rng = random.Random(seed)
    n = rng.randint(2, max_buses)
    edges = set()
    for i in range(1, n):
        parent = rng.randrange(i)
        edges.add((min(i, parent), max(i, parent)))
    for _ in range(rng.randint(0, 2)):
        i, j = rng.randrange(n), rng.randrange(n)
        if i != j:
            edges.add((min(i, j), max(i, j)))
    grid = [(x, y) for x in range(5) for y in range(5)]
    points = rng.sample(grid, n)
    divisor = rng.choice([1.5, 2.0, 2.5])
    source_count = 2 if n > 2 and rng.random() < 0.3 else 1
    sources = rng.sample(range(n), source_count)
    team_count = rng.randint(1, max_teams)
    starts = [rng.randrange(n) for _ in range(team_count)]
    doc = {
        "name": f"random-{seed}",
        "buses": [
            {
                "id": b + 1,
                "pf": rng.choice([0.0, 0.25, 0.5, 1.0]),
                "coord": list(points[b]),
            }
            for b in range(n)
        ],
        "branches": [[i + 1, j + 1] for i, j in sorted(edges)],
        "sources": [s + 1 for s in sorted(sources)],
        "teams": [{"start": b + 1} for b in starts],
        "travel": {"divisor": divisor, "rounding": "ceil"},
    }
    system, _ = load_problem(doc)
    return system, doc
