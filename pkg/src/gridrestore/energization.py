"""Energization reachability and attempt-outcome enumeration.

Bus statuses are small ints: U (unknown, not yet worked), D (damaged), and
E (energized).  A status vector is a plain tuple over all buses, which keeps
states hashable and cheap to intern.
"""

from __future__ import annotations

from collections import deque

U, D, E = 0, 1, 2
STATUS_CHARS = "UDE"


def status_string(statuses):
    return "".join(STATUS_CHARS[s] for s in statuses)


def statuses_from_string(text):
    try:
        return tuple("UDE".index(c) for c in text)
    except ValueError:
        raise ValueError(f"status string {text!r} may only contain U, D, E") from None


def frontier(system, statuses):
    """Unknown buses that can be attempted right now.

    A bus qualifies if it is a source, or sits next to an energized bus.
    """
    out = []
    for i, s in enumerate(statuses):
        if s != U:
            continue
        if i in system.sources or any(statuses[j] == E for j in system.neighbors[i]):
            out.append(i)
    return frozenset(out)


def restorable(system, statuses):
    """Unknown buses restorable after some sequence of successful attempts.

    Grown breadth-first from the frontier across unknown-to-unknown
    adjacency; damaged buses block."""
    seen = set(frontier(system, statuses))
    queue = deque(seen)
    while queue:
        i = queue.popleft()
        for j in system.neighbors[i]:
            if statuses[j] == U and j not in seen:
                seen.add(j)
                queue.append(j)
    return frozenset(seen)


def attemptable(system, statuses, positions):
    """Frontier buses that currently have a team standing on them."""
    return frozenset(i for i in frontier(system, statuses) if i in positions)


def enumerate_outcomes(system, statuses, positions):
    """All ways the pending attempts can settle, with probabilities.

    Teams stay put while the cascade runs: a success can expose the next
    bus under another team, so the attempt set is re-derived after every
    branch until none remain.  Branches follow ascending bus id, zero
    probability branches are never generated, and duplicate leaves are
    merged.  Returns (status vector, probability) pairs in deterministic
    order.
    """
    positions = frozenset(positions)
    merged = {}
    stack = [(tuple(statuses), 1.0)]
    while stack:
        cur, p = stack.pop()
        live = attemptable(system, cur, positions)
        if not live:
            merged[cur] = merged.get(cur, 0.0) + p
            continue
        i = min(live)
        pf = system.pf[i]
        if pf < 1.0:
            succ = list(cur)
            succ[i] = E
            stack.append((tuple(succ), p * (1.0 - pf)))
        if pf > 0.0:
            fail = list(cur)
            fail[i] = D
            stack.append((tuple(fail), p * pf))
    return tuple(sorted(merged.items()))


def unenergized_count(statuses):
    """Buses still without power: every bus not yet energized, damaged or not."""
    return sum(1 for s in statuses if s != E)
