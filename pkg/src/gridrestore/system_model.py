"""Problem documents and the physical system they describe.

A problem document is a JSON object naming buses, branches, sources, field
teams and travel times.  Loading validates every input rule and produces an
immutable :class:`DistributionSystem` plus a list of normalization notes.
Bus ids are 1-based in documents and 0-based everywhere else.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class ProblemError(ValueError):
    """A problem document that violates the input contract."""


def pf_from_fragility(curve, pga):
    """Failure probability at ``pga``, linearly interpolated on the curve.

    The curve is a sequence of (pga, probability) pairs with strictly
    increasing pga and non-decreasing probability.  Outside the curve the
    nearest endpoint value is used.
    """
    _validate_fragility(curve)
    xs = [float(p[0]) for p in curve]
    ys = [float(p[1]) for p in curve]
    return float(np.interp(float(pga), xs, ys))


def _validate_fragility(curve):
    if not curve:
        raise ProblemError("fragility curve must contain at least one point")
    prev_x, prev_y = None, None
    for point in curve:
        if len(point) != 2:
            raise ProblemError("fragility curve points must be [pga, probability] pairs")
        x, y = float(point[0]), float(point[1])
        if not 0.0 <= y <= 1.0:
            raise ProblemError(f"fragility probability {y} outside [0, 1]")
        if prev_x is not None and x <= prev_x:
            raise ProblemError("fragility curve pga values must be strictly increasing")
        if prev_y is not None and y < prev_y:
            raise ProblemError("fragility curve probabilities must be non-decreasing")
        prev_x, prev_y = x, y


def derive_travel_matrix(coords, divisor, rounding="ceil"):
    """Integer travel times from planar coordinates.

    Entry (i, j) is ceil(euclidean(i, j) / divisor).  Distinct coordinates
    guarantee the travel-time axioms, which are still checked afterwards.
    """
    if rounding != "ceil":
        raise ProblemError(f"unsupported travel rounding {rounding!r}, only 'ceil' is defined")
    if not divisor or divisor <= 0:
        raise ProblemError("travel divisor must be positive")
    pts = np.asarray(coords, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ProblemError("coordinates must be [x, y] pairs")
    delta = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((delta * delta).sum(axis=2))
    matrix = np.ceil(dist / float(divisor)).astype(np.int64)
    np.fill_diagonal(matrix, 0)
    validate_travel_matrix(matrix, len(pts))
    return matrix


def validate_travel_matrix(matrix, bus_count):
    """Check the travel-time axioms, raising ProblemError naming the rule."""
    m = np.asarray(matrix)
    if m.shape != (bus_count, bus_count):
        raise ProblemError(
            f"travel matrix must be {bus_count}x{bus_count}, got {m.shape[0]}x{m.shape[1]}"
            if m.ndim == 2
            else f"travel matrix must be {bus_count}x{bus_count}"
        )
    if not np.issubdtype(m.dtype, np.integer):
        if not np.all(np.equal(np.mod(m, 1), 0)):
            raise ProblemError("travel times must be integers")
        m = m.astype(np.int64)
    if np.any(m < 0):
        raise ProblemError("travel times must be non-negative")
    if np.any(np.diag(m) != 0):
        i = int(np.flatnonzero(np.diag(m) != 0)[0])
        raise ProblemError(f"travel time from bus {i + 1} to itself must be 0")
    off = ~np.eye(bus_count, dtype=bool)
    if np.any(m[off] == 0):
        i, j = map(int, np.argwhere((m == 0) & off)[0])
        raise ProblemError(f"travel time between distinct buses {i + 1} and {j + 1} must be positive")
    if np.any(m != m.T):
        i, j = map(int, np.argwhere(m != m.T)[0])
        raise ProblemError(f"travel times must be symmetric, violated for buses {i + 1} and {j + 1}")
    # triangle inequality: time(i,k) <= time(i,j) + time(j,k)
    through = m[:, :, None] + m[None, :, :]      # (i, j, k) -> time(i,j) + time(j,k)
    direct = m[:, None, :]                       # (i, j, k) -> time(i,k)
    bad = direct > through
    idx = np.arange(bus_count)
    bad[idx, idx, :] = False
    bad[:, idx, idx] = False
    bad[idx, :, idx] = False
    if np.any(bad):
        i, j, k = map(int, np.argwhere(bad)[0])
        raise ProblemError(
            "travel times violate the triangle inequality for buses "
            f"({i + 1}, {j + 1}, {k + 1}): time({i + 1},{k + 1}) > "
            f"time({i + 1},{j + 1}) + time({j + 1},{k + 1})"
        )
    return m


@dataclass(frozen=True, eq=False)
class DistributionSystem:
    """Immutable post-earthquake planning instance.

    All indices are 0-based.  ``travel`` is a validated integer matrix,
    ``pf`` the per-bus failure probability, ``team_starts`` the initial bus
    of every field team.
    """

    bus_count: int
    branches: tuple          # ((i, j), ...) with i < j, deduplicated, sorted
    sources: frozenset
    pf: tuple
    travel: np.ndarray
    team_starts: tuple
    coords: tuple | None = None
    name: str | None = None

    def __post_init__(self):
        self.travel.setflags(write=False)

    @cached_property
    def neighbors(self):
        adj = [[] for _ in range(self.bus_count)]
        for i, j in self.branches:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(v)) for v in adj)

    @property
    def team_count(self):
        return len(self.team_starts)

    def time(self, i, j):
        return int(self.travel[i, j])

    def max_travel_time(self):
        return int(self.travel.max()) if self.bus_count > 1 else 0


def load_document(path):
    """Read a problem document from a JSON file."""
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"problem document is not valid JSON: {exc}") from exc


def load_problem(source):
    """Build a validated :class:`DistributionSystem` from a document.

    ``source`` is a path or an already-parsed dict.  Returns
    ``(system, notes)`` where notes records normalizations applied while
    loading (deduplicated branches and the like).
    """
    doc = source if isinstance(source, dict) else load_document(source)
    if not isinstance(doc, dict):
        raise ProblemError("problem document must be a JSON object")
    notes = []

    buses = doc.get("buses")
    if not isinstance(buses, list) or not buses:
        raise ProblemError("problem must declare a non-empty 'buses' array")
    n = len(buses)
    seen_ids = set()
    by_id = {}
    for entry in buses:
        if not isinstance(entry, dict) or "id" not in entry:
            raise ProblemError("each bus needs an object with an 'id'")
        bid = entry["id"]
        if not isinstance(bid, int) or isinstance(bid, bool):
            raise ProblemError(f"bus id {bid!r} must be an integer")
        if bid in seen_ids:
            raise ProblemError(f"bus id {bid} appears more than once")
        seen_ids.add(bid)
        by_id[bid] = entry
    if seen_ids != set(range(1, n + 1)):
        raise ProblemError(f"bus ids must be exactly 1..{n}")

    fragility = doc.get("fragility")
    if fragility is not None:
        _validate_fragility(fragility)

    pf = []
    for bid in range(1, n + 1):
        entry = by_id[bid]
        if "pf" in entry and entry["pf"] is not None:
            value = float(entry["pf"])
            if not 0.0 <= value <= 1.0:
                raise ProblemError(f"bus {bid}: pf {value} outside [0, 1]")
        elif "pga" in entry and entry["pga"] is not None:
            if fragility is None:
                raise ProblemError(f"bus {bid} gives pga but the problem has no fragility curve")
            pga = float(entry["pga"])
            if pga < 0:
                raise ProblemError(f"bus {bid}: pga must be non-negative")
            value = pf_from_fragility(fragility, pga)
        else:
            raise ProblemError(f"bus {bid} needs either pf or pga")
        pf.append(value)

    raw_branches = doc.get("branches", [])
    if not isinstance(raw_branches, list):
        raise ProblemError("'branches' must be an array of [i, j] pairs")
    branches = []
    seen_branches = set()
    for pair in raw_branches:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ProblemError(f"branch {pair!r} must be an [i, j] pair")
        i, j = pair
        for end in (i, j):
            if end not in seen_ids:
                raise ProblemError(f"branch {pair!r} references unknown bus {end}")
        if i == j:
            raise ProblemError(f"branch endpoints must differ, got ({i}, {j})")
        key = (min(i, j) - 1, max(i, j) - 1)
        if key in seen_branches:
            notes.append(f"duplicate branch ({i}, {j}) removed")
            continue
        seen_branches.add(key)
        branches.append(key)
    branches.sort()

    sources = doc.get("sources")
    if not isinstance(sources, list) or not sources:
        raise ProblemError("problem must declare at least one source bus")
    source_set = set()
    for s in sources:
        if s not in seen_ids:
            raise ProblemError(f"source {s!r} is not a bus id")
        if s - 1 in source_set:
            notes.append(f"duplicate source {s} removed")
        source_set.add(s - 1)

    teams = doc.get("teams")
    if not isinstance(teams, list) or not teams:
        raise ProblemError("problem must declare at least one field team")
    starts = []
    for entry in teams:
        if not isinstance(entry, dict) or "start" not in entry:
            raise ProblemError("each team needs an object with a 'start' bus id")
        start = entry["start"]
        if start not in seen_ids:
            raise ProblemError(f"team start {start!r} is not a bus id")
        starts.append(start - 1)

    coords = None
    if all("coord" in by_id[b] and by_id[b]["coord"] is not None for b in range(1, n + 1)):
        coords = []
        for bid in range(1, n + 1):
            c = by_id[bid]["coord"]
            if not isinstance(c, (list, tuple)) or len(c) != 2:
                raise ProblemError(f"bus {bid}: coord must be an [x, y] pair")
            coords.append((float(c[0]), float(c[1])))
        coords = tuple(coords)

    travel_spec = doc.get("travel")
    if not isinstance(travel_spec, dict):
        raise ProblemError("problem must declare 'travel' with either a matrix or a divisor")
    has_matrix = "matrix" in travel_spec
    has_divisor = "divisor" in travel_spec
    if has_matrix == has_divisor:
        raise ProblemError("'travel' must give exactly one of 'matrix' or 'divisor'")
    if has_matrix:
        matrix = validate_travel_matrix(np.asarray(travel_spec["matrix"]), n)
    else:
        if coords is None:
            missing = [b for b in range(1, n + 1) if by_id[b].get("coord") is None]
            raise ProblemError(
                f"travel by divisor requires a coord on every bus, missing for bus {missing[0]}"
            )
        matrix = derive_travel_matrix(coords, travel_spec["divisor"], travel_spec.get("rounding", "ceil"))

    system = DistributionSystem(
        bus_count=n,
        branches=tuple(branches),
        sources=frozenset(source_set),
        pf=tuple(pf),
        travel=matrix,
        team_starts=tuple(starts),
        coords=coords,
        name=doc.get("name"),
    )
    return system, notes
