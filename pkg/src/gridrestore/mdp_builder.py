"""Reachable decision-process construction with optional reductions.

States pair a bus-status vector with per-team (destination, remaining)
tuples.  The builder explores forward from the fully-unknown state,
interning states in discovery order, so a single-threaded build is
bit-reproducible.

Reductions are selected by single-letter flags:

    V  fuse deterministic travel into multi-step transitions
    P  drop team-to-target permutations dominated on arrival times
    W  window arrivals on attemptable buses (implies V)
    O  drop gotos that drive past an equally good stop on the way
    S  canonicalize team order (teams are interchangeable)
"""

from __future__ import annotations

import time as _time
from collections import deque
from dataclasses import dataclass, field

from .actions import (
    CONTINUE,
    WAIT,
    command_target,
    eliminate_on_the_way,
    eliminate_permutations,
    feasible_actions,
    is_goto,
)
from .energization import (
    U,
    attemptable,
    enumerate_outcomes,
    frontier,
    restorable,
    status_string,
    unenergized_count,
)

FLAG_LETTERS = "VPWOS"

# default reachable-state cap; RESTORATION_MAX_STATES overrides it downstream
DEFAULT_MAX_STATES = 50_000_000

# the flag combinations exercised by benchmarks and equivalence sweeps
FLAG_SUBSETS = (
    "",
    "V",
    "W",
    "P",
    "O",
    "POV",
    "POW",
    "S",
    "SPV",
    "SPW",
    "SOV",
    "SOW",
    "SPO",
    "SPOV",
    "SPOW",
)


class StateCapError(RuntimeError):
    """Raised when the reachable state space exceeds the configured cap."""

    def __init__(self, states, frontier_size):
        self.states = states
        self.frontier_size = frontier_size
        super().__init__(
            f"state cap exceeded at {states} states with {frontier_size} states "
            "still on the frontier; raise the cap or partition the system"
        )


def normalize_flags(flags):
    """Parse a flag spelling into the effective flag set.

    Accepts an iterable of letters or a string like ``"SOV"`` or
    ``"S+O+V"``; ``-`` means none.  W implies V, which is added silently.
    """
    if isinstance(flags, frozenset):
        if flags <= frozenset(FLAG_LETTERS) and ("W" not in flags or "V" in flags):
            return flags
        flags = "".join(flags)
    if flags is None:
        flags = ""
    if isinstance(flags, str):
        letters = [c for c in flags.upper() if c not in "+- "]
    else:
        letters = [str(c).upper() for c in flags]
    unknown = sorted(set(letters) - set(FLAG_LETTERS))
    if unknown:
        raise ValueError(f"unknown reduction flag(s) {', '.join(unknown)}; valid flags are V, P, W, O, S")
    effective = set(letters)
    if "W" in effective:
        effective.add("V")
    return frozenset(effective)


def flags_label(flags):
    """Canonical short label: S, P, O, W order, V only when not implied."""
    flags = normalize_flags(flags)
    order = "SPOW" + ("V" if "W" not in flags else "")
    label = "".join(c for c in order if c in flags)
    return label or "-"


@dataclass(frozen=True)
class ActionRecord:
    """One joint action of one state.

    ``commands`` is None for the automatic initial cascade at the root
    (teams already standing on attemptable buses).  ``transitions`` holds
    (successor index, probability) pairs; all share ``duration``.
    ``rate`` is the cost accrued per time step while the action runs: the
    number of unenergized buses in the state the action leaves.
    """

    commands: tuple | None
    duration: int
    rate: int
    transitions: tuple


@dataclass
class Mdp:
    system: object
    flags: frozenset
    bus_states: list
    team_states: list
    actions: list
    terminal: list
    initial_team_order: tuple
    meta: dict = field(default_factory=dict)

    @property
    def state_count(self):
        return len(self.bus_states)

    @property
    def transition_count(self):
        return sum(len(rec.transitions) for recs in self.actions for rec in recs)

    @property
    def action_count(self):
        return sum(len(recs) for recs in self.actions)

    def state_label(self, k):
        teams = ",".join(
            f"@{d + 1}" if r == 0 else f"->{d + 1}({r})" for d, r in self.team_states[k]
        )
        return f"{status_string(self.bus_states[k])} [{teams}]"

    def to_document(self):
        """JSON-ready dump of the full process, for export and debugging."""
        states = []
        for k in range(self.state_count):
            recs = []
            for rec in self.actions[k]:
                recs.append(
                    {
                        "commands": None if rec.commands is None else [
                            command_to_json(i, c) for i, c in enumerate(rec.commands)
                        ],
                        "cascade": rec.commands is None,
                        "duration": rec.duration,
                        "rate": rec.rate,
                        "transitions": [{"to": s, "p": p} for s, p in rec.transitions],
                    }
                )
            states.append(
                {
                    "status": status_string(self.bus_states[k]),
                    "teams": [[d + 1, r] for d, r in self.team_states[k]],
                    "terminal": self.terminal[k],
                    "actions": recs,
                }
            )
        return {"meta": dict(self.meta), "states": states}


def command_to_json(team_index, command):
    if command == WAIT:
        return {"team": team_index + 1, "command": "wait"}
    if command == CONTINUE:
        return {"team": team_index + 1, "command": "continue"}
    return {"team": team_index + 1, "command": "goto", "bus": command + 1}


def advance_teams(teams, action, dt, system, clamp=False):
    """Move every team dt time units along its command.

    Waiting teams hold position.  A goto resets the destination and counts
    down from the full travel time.  Overshooting the destination is a
    contract violation unless ``clamp`` is set, in which case the team
    arrives and holds (used by windowed arrivals).
    """
    out = []
    for (dest, remaining), c in zip(teams, action):
        if c == WAIT:
            out.append((dest, remaining))
            continue
        if c == CONTINUE:
            nd, nr = dest, remaining - dt
        else:
            nd, nr = c, system.time(dest, c) - dt
        if nr < 0:
            if not clamp:
                raise ValueError(
                    f"advance by {dt} overshoots a team bound for bus {nd + 1}"
                )
            nr = 0
        out.append((nd, nr))
    return tuple(out)


def expand_action(system, statuses, teams, action, flags="", outcomes=None, front=None):
    """Successor distribution of one action at one state.

    Returns ``(duration, leaves)`` where leaves are (statuses, teams,
    probability) triples with team order canonicalized when S is on.
    ``outcomes`` and ``front`` accept memoized lookups; the builder injects
    its caches through them.
    """
    flags = normalize_flags(flags)
    v_flag = "V" in flags
    w_flag = "W" in flags
    nonwait = [(i, c) for i, c in enumerate(action) if c != WAIT]
    if not nonwait:
        raise ValueError("an all-wait action has no successor distribution")
    if front is None:
        front = frontier(system, statuses)
    if outcomes is None:
        def outcomes(st, pos):
            return enumerate_outcomes(system, st, pos)

    def travel_left(i, c):
        return teams[i][1] if c == CONTINUE else system.time(teams[i][0], c)

    if not v_flag:
        dt = 1
    elif w_flag:
        windows = [
            travel_left(i, c)
            for i, c in nonwait
            if command_target(c, teams[i]) in front
        ]
        if not windows:
            raise ValueError("windowed arrivals need a moving command aimed at an attemptable bus")
        dt = min(windows)
    else:
        dt = min(travel_left(i, c) for i, c in nonwait)

    moved = advance_teams(teams, action, dt, system, clamp=w_flag)
    positions = frozenset(d for d, r in moved if r == 0)
    succ_teams = tuple(sorted(moved)) if "S" in flags else moved
    return dt, [(st, succ_teams, p) for st, p in outcomes(statuses, positions)]


def build(system, flags="", max_states=None, on_progress=None):
    """Explore the reachable process under the given reduction flags.

    Returns an :class:`Mdp`.  ``max_states`` caps the state table;
    exceeding it raises :class:`StateCapError` with the frontier size, a
    hint for partitioning.  ``on_progress(states, frontier)`` is invoked
    periodically during exploration.
    """
    t0 = _time.perf_counter()
    flags = normalize_flags(flags)
    w_flag = "W" in flags
    p_flag = "P" in flags
    o_flag = "O" in flags
    s_flag = "S" in flags
    n = system.bus_count
    team_count = system.team_count

    front_cache = {}
    rest_cache = {}
    outcome_cache = {}

    def front_of(statuses):
        got = front_cache.get(statuses)
        if got is None:
            got = front_cache[statuses] = frontier(system, statuses)
        return got

    def rest_of(statuses):
        got = rest_cache.get(statuses)
        if got is None:
            got = rest_cache[statuses] = restorable(system, statuses)
        return got

    def outcomes_of(statuses, positions):
        key = (statuses, positions)
        got = outcome_cache.get(key)
        if got is None:
            got = outcome_cache[key] = enumerate_outcomes(system, statuses, positions)
        return got

    bus_states = []
    team_states = []
    action_table = []
    terminal = []
    index = {}
    queue = deque()

    def intern(statuses, teams):
        key = (statuses, teams)
        k = index.get(key)
        if k is None:
            k = len(bus_states)
            if max_states is not None and k >= max_states:
                raise StateCapError(k, len(queue))
            index[key] = k
            bus_states.append(statuses)
            team_states.append(teams)
            action_table.append(None)
            terminal.append(False)
            queue.append(k)
        return k

    def canonical(teams):
        return tuple(sorted(teams)) if s_flag else teams

    statuses0 = (U,) * n
    physical0 = tuple((b, 0) for b in system.team_starts)
    initial_order = tuple(sorted(range(team_count), key=lambda i: (physical0[i], i)))
    teams0 = canonical(physical0)
    root = intern(statuses0, teams0)
    queue.popleft()

    positions0 = frozenset(d for d, r in teams0 if r == 0)
    root_cascade = bool(attemptable(system, statuses0, positions0))
    if root_cascade:
        # teams already stand on attemptable buses: the first attempts are
        # not a decision, they happen immediately and cost nothing
        merged = {}
        for succ_statuses, p in outcomes_of(statuses0, positions0):
            k = intern(succ_statuses, teams0)
            merged[k] = merged.get(k, 0.0) + p
        action_table[root] = [
            ActionRecord(None, 0, 0, tuple(sorted(merged.items())))
        ]
    else:
        queue.append(root)

    since_report = 0
    while queue:
        k = queue.popleft()
        statuses = bus_states[k]
        teams = team_states[k]
        front = front_of(statuses)

        if not front:
            terminal[k] = True
            rate = unenergized_count(statuses)
            action_table[k] = [
                ActionRecord((WAIT,) * team_count, 1, rate, ((k, 1.0),))
            ]
            continue

        acts = feasible_actions(system, statuses, teams, front=front, rest=rest_of(statuses))
        if p_flag:
            acts = eliminate_permutations(system, teams, acts)
        if o_flag:
            acts = eliminate_on_the_way(system, statuses, teams, acts, w_flag, front=front)

        rate = unenergized_count(statuses)
        records = []
        for action in acts:
            dt, leaves = expand_action(
                system, statuses, teams, action, flags,
                outcomes=outcomes_of, front=front,
            )
            merged = {}
            for succ_statuses, succ_teams, p in leaves:
                j = intern(succ_statuses, succ_teams)
                merged[j] = merged.get(j, 0.0) + p
            records.append(ActionRecord(action, dt, rate, tuple(sorted(merged.items()))))
        action_table[k] = records

        since_report += 1
        if on_progress is not None and since_report >= 1024:
            since_report = 0
            on_progress(len(bus_states), len(queue))

    if on_progress is not None:
        on_progress(len(bus_states), 0)

    max_time = system.max_travel_time()
    mdp = Mdp(
        system=system,
        flags=flags,
        bus_states=bus_states,
        team_states=team_states,
        actions=action_table,
        terminal=terminal,
        initial_team_order=initial_order,
        meta={},
    )
    mdp.meta.update(
        {
            "name": system.name,
            "flags": flags_label(flags),
            "states": mdp.state_count,
            "actions": mdp.action_count,
            "transitions": mdp.transition_count,
            "state_bound": (3 ** n) * (n * (max_time + 1)) ** team_count,
            "build_seconds": round(_time.perf_counter() - t0, 6),
        }
    )
    return mdp


def longest_horizon(mdp):
    """Duration of the longest root-to-terminal path.

    The transition graph minus terminal self-loops is acyclic, so a
    topological pass suffices.  This is the natural planning horizon: past
    it every extra step only replays terminal self-loops.
    """
    scount = mdp.state_count
    indegree = [0] * scount
    for k in range(scount):
        for rec in mdp.actions[k]:
            for succ, _ in rec.transitions:
                if succ != k:
                    indegree[succ] += 1
    dist = [0] * scount
    queue = deque(k for k in range(scount) if indegree[k] == 0)
    seen = 0
    while queue:
        k = queue.popleft()
        seen += 1
        for rec in mdp.actions[k]:
            for succ, _ in rec.transitions:
                if succ == k:
                    continue
                if dist[k] + rec.duration > dist[succ]:
                    dist[succ] = dist[k] + rec.duration
                if indegree[succ] == 1:
                    queue.append(succ)
                indegree[succ] -= 1
    if seen != scount:
        raise RuntimeError("transition graph has a cycle outside terminal self-loops")
    return max((dist[k] for k in range(scount) if mdp.terminal[k]), default=0)
