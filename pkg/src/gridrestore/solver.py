"""Exact finite-horizon solving by backward induction.

The built process is flattened into contiguous arrays (transitions grouped
per action, actions grouped per state) so one layer of backups is a single
vectorized sweep.  Two interchangeable kernels exist: a numba-compiled
loop and a pure-numpy path.  RESTORATION_BACKEND=numba|numpy forces one;
by default numba is used when importable.
"""

from __future__ import annotations

import os
import time as _time
from dataclasses import dataclass

import numpy as np

from .mdp_builder import longest_horizon

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


def available_backends():
    return ("numba", "numpy") if _HAS_NUMBA else ("numpy",)


def resolve_backend(name=None):
    name = name or os.environ.get("RESTORATION_BACKEND") or "auto"
    name = name.lower()
    if name == "auto":
        return "numba" if _HAS_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown solver backend {name!r}, expected numba or numpy")
    if name == "numba" and not _HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return name


@dataclass
class _Flat:
    """Contiguous representation of the process for the kernels."""

    act_offsets: np.ndarray   # (S+1,) action range per state
    act_dur: np.ndarray       # (A,)
    act_rate: np.ndarray      # (A,) float64
    tr_offsets: np.ndarray    # (A+1,) transition range per action
    tr_succ: np.ndarray       # (T,)
    tr_prob: np.ndarray       # (T,)
    dur_groups: list          # [(duration, transition index array)]
    zero_duration_states: list


def _flatten(mdp):
    act_offsets = [0]
    act_dur = []
    act_rate = []
    tr_offsets = [0]
    tr_succ = []
    tr_prob = []
    zero_states = []
    for k in range(mdp.state_count):
        for rec in mdp.actions[k]:
            act_dur.append(rec.duration)
            act_rate.append(float(rec.rate))
            if rec.duration == 0:
                if k not in zero_states:
                    zero_states.append(k)
            for succ, p in rec.transitions:
                tr_succ.append(succ)
                tr_prob.append(p)
            tr_offsets.append(len(tr_succ))
        act_offsets.append(len(act_dur))

    act_dur = np.asarray(act_dur, dtype=np.int64)
    tr_offsets = np.asarray(tr_offsets, dtype=np.int64)
    tr_dur = np.repeat(act_dur, np.diff(tr_offsets))
    dur_groups = [
        (int(d), np.flatnonzero(tr_dur == d))
        for d in np.unique(act_dur)
        if d > 0
    ]
    return _Flat(
        act_offsets=np.asarray(act_offsets, dtype=np.int64),
        act_dur=act_dur,
        act_rate=np.asarray(act_rate, dtype=np.float64),
        tr_offsets=tr_offsets,
        tr_succ=np.asarray(tr_succ, dtype=np.int64),
        tr_prob=np.asarray(tr_prob, dtype=np.float64),
        dur_groups=dur_groups,
        zero_duration_states=zero_states,
    )


def _backup_numpy(n, flat, ring, depth, out, chosen, want_argmin):
    vals = np.zeros_like(flat.tr_prob)
    for d, idx in flat.dur_groups:
        layer = n - d
        if layer > 0:
            vals[idx] = ring[layer % depth][flat.tr_succ[idx]]
    contrib = flat.tr_prob * vals
    act_sum = np.add.reduceat(contrib, flat.tr_offsets[:-1])
    q = flat.act_rate * np.minimum(n, flat.act_dur) + act_sum
    np.minimum.reduceat(q, flat.act_offsets[:-1], out=out)
    if want_argmin:
        counts = np.diff(flat.act_offsets)
        matches = np.where(
            q == np.repeat(out, counts), np.arange(len(q)), len(q)
        )
        first = np.minimum.reduceat(matches, flat.act_offsets[:-1])
        chosen[:] = first - flat.act_offsets[:-1]


@njit(cache=True)
def _backup_numba_kernel(n, act_offsets, act_dur, act_rate, tr_offsets, tr_succ, tr_prob, ring, depth, out, chosen, want_argmin):
    states = act_offsets.shape[0] - 1
    for s in range(states):
        best = np.inf
        best_a = -1
        for a in range(act_offsets[s], act_offsets[s + 1]):
            d = act_dur[a]
            layer = n - d
            acc = 0.0
            if layer > 0:
                row = layer % depth
                for t in range(tr_offsets[a], tr_offsets[a + 1]):
                    acc += tr_prob[t] * ring[row, tr_succ[t]]
            clip = n if n < d else d
            q = act_rate[a] * clip + acc
            if q < best:
                best = q
                best_a = a
        out[s] = best
        if want_argmin:
            chosen[s] = best_a - act_offsets[s]


def _backup_numba(n, flat, ring, depth, out, chosen, want_argmin):
    _backup_numba_kernel(
        n,
        flat.act_offsets,
        flat.act_dur,
        flat.act_rate,
        flat.tr_offsets,
        flat.tr_succ,
        flat.tr_prob,
        ring,
        depth,
        out,
        chosen,
        want_argmin,
    )


def _patch_zero_duration(mdp, flat, n, layer_vals, chosen, want_argmin):
    # the automatic initial cascade reads values from its own layer, so
    # such states are redone after the bulk sweep; the builder only ever
    # creates one, the root, with the cascade as its single action
    for k in flat.zero_duration_states:
        recs = mdp.actions[k]
        if len(recs) != 1 or recs[0].duration != 0:
            raise RuntimeError("a state mixes zero- and positive-duration actions")
        layer_vals[k] = sum(p * layer_vals[succ] for succ, p in recs[0].transitions)
        if want_argmin:
            chosen[k] = 0


@dataclass
class Policy:
    """Solved values and the optimal first action per state."""

    horizon: int
    values: np.ndarray
    chosen: np.ndarray
    layers: np.ndarray | None
    backend: str
    solve_seconds: float


def solve(mdp, horizon="auto", retain_layers=False, backend=None):
    """Backward induction over ``horizon`` steps.

    ``horizon="auto"`` uses the longest root-to-terminal path duration
    (at least 1).  ``retain_layers`` keeps every value layer, which
    what-if queries and interactive execution need.
    """
    t0 = _time.perf_counter()
    if horizon in ("auto", None):
        horizon = max(1, longest_horizon(mdp))
    horizon = int(horizon)
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    backend_name = resolve_backend(backend)
    kernel = _backup_numba if backend_name == "numba" else _backup_numpy

    flat = _flatten(mdp)
    if any(k != 0 for k in flat.zero_duration_states):
        raise RuntimeError("zero-duration actions are only expected at the root")
    scount = mdp.state_count
    max_dur = int(flat.act_dur.max()) if len(flat.act_dur) else 1

    if retain_layers:
        layers = np.zeros((horizon + 1, scount), dtype=np.float64)
        ring = layers
        depth = horizon + 1
    else:
        layers = None
        depth = max(2, max_dur + 1)
        ring = np.zeros((depth, scount), dtype=np.float64)

    chosen = np.zeros(scount, dtype=np.int64)
    out = np.empty(scount, dtype=np.float64)
    for n in range(1, horizon + 1):
        want_argmin = n == horizon
        if retain_layers:
            target = layers[n]
        else:
            target = out
        kernel(n, flat, ring, depth, target, chosen, want_argmin)
        _patch_zero_duration(mdp, flat, n, target, chosen, want_argmin)
        if not retain_layers:
            ring[n % depth][:] = target

    if horizon == 0:
        values = np.zeros(scount, dtype=np.float64)
    else:
        values = np.array(layers[horizon] if retain_layers else target, dtype=np.float64, copy=True)
    return Policy(
        horizon=horizon,
        values=values,
        chosen=chosen,
        layers=layers,
        backend=backend_name,
        solve_seconds=_time.perf_counter() - t0,
    )


def action_values(mdp, policy, state, remaining=None):
    """Expected cost of each action of ``state`` with ``remaining`` steps left."""
    if policy.layers is None:
        raise ValueError("what-if queries need solve(..., retain_layers=True)")
    n = policy.horizon if remaining is None else int(remaining)
    n = max(0, min(n, policy.horizon))
    out = []
    for rec in mdp.actions[state]:
        layer = n - rec.duration
        cont = 0.0
        if layer > 0:
            row = policy.layers[layer]
            cont = sum(p * row[succ] for succ, p in rec.transitions)
        out.append(rec.rate * min(n, rec.duration) + cont)
    return np.asarray(out, dtype=np.float64)


def choose(mdp, policy, state, remaining=None):
    """Index of the optimal action at the given remaining horizon."""
    return int(np.argmin(action_values(mdp, policy, state, remaining)))


def what_if(mdp, policy, state, action_index, remaining=None):
    """Expected cost of committing to one particular action now."""
    q = action_values(mdp, policy, state, remaining)
    if not 0 <= action_index < len(q):
        raise IndexError(f"state has {len(q)} actions, no index {action_index}")
    return float(q[action_index])


def average_expected_cost_per_bus(mdp, policy):
    """Initial expected cost normalized by system size."""
    return float(policy.values[0]) / mdp.system.bus_count
