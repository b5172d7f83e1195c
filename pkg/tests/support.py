"""Shared helpers for the test suite."""

from __future__ import annotations

import json
from itertools import product
from pathlib import Path

from gridrestore.energization import D, E, U
from gridrestore.system_model import load_problem

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

_cache = {}


def load_example(name):
    """Load a bundled problem document, cached per test session."""
    if name not in _cache:
        _cache[name] = load_problem(PROBLEMS / f"{name}.json")
    return _cache[name]


def load_document(name):
    """Raw JSON document of a bundled problem, fresh copy every call."""
    with open(PROBLEMS / f"{name}.json") as fh:
        return json.load(fh)


def exhaustive_outcome_distribution(system, statuses, positions):
    """Brute-force attempt-outcome distribution for cross-checking.

    Assigns a health value to every unknown bus up front, replays the
    cascade deterministically at fixed team positions, and accumulates the
    assignment probabilities by resulting status vector.  Unattempted
    buses marginalize out through the merge.
    """
    unknowns = [i for i, s in enumerate(statuses) if s == U]
    positions = set(positions)
    dist = {}
    for assignment in product((True, False), repeat=len(unknowns)):
        health = dict(zip(unknowns, assignment))
        prob = 1.0
        for i, works in health.items():
            prob *= (1.0 - system.pf[i]) if works else system.pf[i]
        if prob == 0.0:
            continue
        cur = list(statuses)
        changed = True
        while changed:
            changed = False
            for i in positions:
                if cur[i] != U:
                    continue
                if i in system.sources or any(cur[j] == E for j in system.neighbors[i]):
                    cur[i] = E if health[i] else D
                    changed = True
        key = tuple(cur)
        dist[key] = dist.get(key, 0.0) + prob
    return dist
