"""HTTP facade for interactive restoration sessions.

A problem document is uploaded, solved asynchronously, then stepped as a
live session: the service hands out per-team commands, the operator
reports observed bus outcomes, and the session advances along the unique
matching transition.  Sessions live in memory with optional append-only
JSON-lines persistence for crash replay.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .actions import CONTINUE, WAIT
from .energization import D, E, U, status_string
from .mdp_builder import (
    DEFAULT_MAX_STATES,
    StateCapError,
    advance_teams,
    build,
    command_to_json,
    flags_label,
    normalize_flags,
)
from .solver import action_values, choose, solve, what_if
from .system_model import ProblemError, load_problem

_STATUS_NAMES = {U: "unknown", D: "damaged", E: "energized"}


def _new_id():
    return uuid.uuid4().hex[:12]


@dataclass
class ProblemEntry:
    document: dict
    system: object
    warnings: list
    job: dict | None = None
    solved: object = None      # (mdp, policy) once a solve finished
    policy_version: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class Session:
    problem_id: str
    policy_version: int
    state: int
    elapsed: int
    physical_teams: tuple
    travelled_from: list
    history: list
    lock: threading.Lock = field(default_factory=threading.Lock)


def _team_sort_permutation(physical_teams):
    """Canonical position -> physical team index, ties by physical order."""
    return sorted(range(len(physical_teams)), key=lambda i: (physical_teams[i], i))


def _physical_commands(mdp, commands, physical_teams):
    """Map a canonical command vector back onto the physical team order."""
    if "S" not in mdp.flags:
        return tuple(commands)
    perm = _team_sort_permutation(physical_teams)
    out = [None] * len(commands)
    for canonical_pos, physical_index in enumerate(perm):
        out[physical_index] = commands[canonical_pos]
    return tuple(out)


def _transition_delta(mdp, state, succ):
    """Per-bus status changes of one transition, 1-based keys."""
    before = mdp.bus_states[state]
    after = mdp.bus_states[succ]
    return {
        b + 1: _STATUS_NAMES[after[b]]
        for b in range(len(before))
        if before[b] != after[b]
    }


def _parse_outcomes(raw):
    if not isinstance(raw, dict):
        raise ValueError("outcomes must be an object of {bus: energized|damaged}")
    parsed = {}
    for key, value in raw.items():
        try:
            bus = int(key)
        except (TypeError, ValueError):
            raise ValueError(f"bus id {key!r} is not an integer") from None
        if value not in ("energized", "damaged"):
            raise ValueError(f"bus {bus}: outcome must be energized or damaged, got {value!r}")
        parsed[bus] = value
    return parsed


def create_app(max_states=None, session_log_dir=None, console_dir=None):
    app = FastAPI(title="gridrestore service", version="0.1.0")
    problems = {}
    sessions = {}
    store_lock = threading.Lock()

    if max_states is None:
        env = os.environ.get("RESTORATION_MAX_STATES")
        max_states = int(env) if env else DEFAULT_MAX_STATES
    log_dir = Path(session_log_dir) if session_log_dir else None
    if log_dir:
        log_dir.mkdir(parents=True, exist_ok=True)

    def get_problem(pid):
        entry = problems.get(pid)
        if entry is None:
            raise HTTPException(404, f"no problem {pid!r}")
        return entry

    def get_session(sid):
        sess = sessions.get(sid)
        if sess is None:
            raise HTTPException(404, f"no session {sid!r}")
        return sess

    def log_event(sid, event):
        if not log_dir:
            return
        event = {"ts": round(time.time(), 3), **event}
        with open(log_dir / f"{sid}.jsonl", "a") as fh:
            fh.write(json.dumps(event) + "\n")

    # ------------------------------------------------------------------
    # problems and solving

    @app.post("/problems", status_code=201)
    async def create_problem(request: Request):
        doc = await request.json()
        try:
            system, warnings = load_problem(doc)
        except ProblemError as exc:
            raise HTTPException(400, str(exc))
        pid = _new_id()
        with store_lock:
            problems[pid] = ProblemEntry(document=doc, system=system, warnings=warnings)
        return {
            "id": pid,
            "name": system.name,
            "buses": system.bus_count,
            "teams": system.team_count,
            "warnings": warnings,
        }

    @app.get("/problems/{pid}")
    def get_problem_document(pid: str):
        entry = get_problem(pid)
        return {
            "id": pid,
            "document": entry.document,
            "warnings": entry.warnings,
            "solved": entry.solved is not None,
            "policy_version": entry.policy_version,
        }

    @app.post("/problems/{pid}/solve", status_code=202)
    async def solve_problem(pid: str, request: Request):
        entry = get_problem(pid)
        body = await request.json() if await request.body() else {}
        try:
            flags = normalize_flags(body.get("flags", "SPOW"))
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        horizon = body.get("horizon", "auto")
        if horizon != "auto" and (not isinstance(horizon, int) or horizon < 1):
            raise HTTPException(400, "horizon must be a positive integer or 'auto'")
        with entry.lock:
            if entry.job is not None and entry.job["status"] in ("pending", "running"):
                raise HTTPException(409, f"problem {pid} is already being solved")
            job_id = _new_id()
            job = {
                "id": job_id,
                "status": "pending",
                "flags": flags_label(flags),
                "progress": {"states": 0, "frontier": 0},
            }
            entry.job = job

        def run():
            job["status"] = "running"
            t0 = time.perf_counter()

            def on_progress(states, frontier):
                job["progress"] = {"states": states, "frontier": frontier}

            try:
                mdp = build(entry.system, flags, max_states=max_states, on_progress=on_progress)
                policy = solve(mdp, horizon=horizon, retain_layers=True)
            except StateCapError as exc:
                job["status"] = "error"
                job["cap_exceeded"] = True
                job["error"] = str(exc)
                job["frontier"] = exc.frontier_size
                return
            except Exception as exc:  # pragma: no cover - defensive
                job["status"] = "error"
                job["error"] = str(exc)
                return
            with entry.lock:
                entry.solved = (mdp, policy)
                entry.policy_version += 1
                job["status"] = "done"
                job["result"] = {
                    "policy_version": entry.policy_version,
                    "states": mdp.state_count,
                    "transitions": mdp.transition_count,
                    "horizon": policy.horizon,
                    "value": float(policy.values[0]),
                    "seconds": round(time.perf_counter() - t0, 6),
                    "backend": policy.backend,
                }

        threading.Thread(target=run, daemon=True).start()
        return {"job": job_id, "problem": pid}

    @app.get("/problems/{pid}/jobs/{job_id}")
    def job_status(pid: str, job_id: str):
        entry = get_problem(pid)
        job = entry.job
        if job is None or job["id"] != job_id:
            raise HTTPException(404, f"no job {job_id!r} for problem {pid!r}")
        if job["status"] == "error" and job.get("cap_exceeded"):
            return JSONResponse(
                status_code=422,
                content={
                    "status": "error",
                    "error": job["error"],
                    "hint": "state cap exceeded: partition the system into groups and solve them separately",
                    "frontier": job.get("frontier"),
                },
            )
        return job

    # ------------------------------------------------------------------
    # sessions

    def session_payload(sid, sess):
        entry = problems[sess.problem_id]
        mdp, policy = entry.solved
        state = sess.state
        remaining = max(0, policy.horizon - sess.elapsed)
        terminal = bool(mdp.terminal[state])
        exhausted = remaining <= 0 and not terminal
        statuses = mdp.bus_states[state]

        payload = {
            "session": sid,
            "problem": sess.problem_id,
            "policy_version": sess.policy_version,
            "statuses": [_STATUS_NAMES[s] for s in statuses],
            "teams": [],
            "elapsed": sess.elapsed,
            "remaining_horizon": remaining,
            "terminal": terminal,
            "horizon_exhausted": exhausted,
            "history": list(sess.history),
        }
        for i, (dest, rem) in enumerate(sess.physical_teams):
            if rem == 0:
                payload["teams"].append({"team": i + 1, "at": dest + 1})
            else:
                marker = {"team": i + 1, "to": dest + 1, "remaining": rem}
                if sess.travelled_from[i] is not None:
                    marker["from"] = sess.travelled_from[i] + 1
                payload["teams"].append(marker)

        if terminal or exhausted:
            payload.update(
                commands=None,
                cascade=False,
                expected_cost=float(policy.layers[remaining][state]) if remaining > 0 else 0.0,
                attempt_options=[],
                must_report=[],
                alternatives=[],
                summary={
                    "energized": sum(1 for s in statuses if s == E),
                    "damaged": sum(1 for s in statuses if s == D),
                    "unknown": sum(1 for s in statuses if s == U),
                    "elapsed": sess.elapsed,
                    "reason": "terminal" if terminal else "horizon exhausted",
                },
            )
            return payload

        action_index = choose(mdp, policy, state, remaining)
        rec = mdp.actions[state][action_index]
        if rec.commands is None:
            commands = None
            physical = None
        else:
            physical = _physical_commands(mdp, rec.commands, sess.physical_teams)
            commands = [command_to_json(i, c) for i, c in enumerate(physical)]

        options = []
        for succ, p in rec.transitions:
            options.append(
                {
                    "outcomes": {
                        str(b): v for b, v in sorted(_transition_delta(mdp, state, succ).items())
                    },
                    "p": p,
                }
            )
        key_sets = [set(map(int, o["outcomes"])) for o in options]
        must = sorted(set.intersection(*key_sets)) if key_sets else []

        q = action_values(mdp, policy, state, remaining)
        ranked = sorted(range(len(q)), key=lambda a: (q[a], a))
        alternatives = []
        for a in ranked[:3]:
            alt_rec = mdp.actions[state][a]
            if alt_rec.commands is None:
                alt_commands = None
            else:
                alt_physical = _physical_commands(mdp, alt_rec.commands, sess.physical_teams)
                alt_commands = [command_to_json(i, c) for i, c in enumerate(alt_physical)]
            alternatives.append(
                {"action": a, "value": float(q[a]), "commands": alt_commands, "chosen": a == action_index}
            )

        payload.update(
            commands=commands,
            cascade=rec.commands is None,
            action=action_index,
            expected_cost=float(q[action_index]),
            attempt_options=options,
            must_report=must,
            alternatives=alternatives,
        )
        return payload

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.json()
        pid = body.get("problem")
        entry = get_problem(pid)
        if entry.solved is None:
            raise HTTPException(409, f"problem {pid} is not solved yet")
        mdp, _ = entry.solved
        sid = _new_id()
        physical = tuple((b, 0) for b in entry.system.team_starts)
        sess = Session(
            problem_id=pid,
            policy_version=entry.policy_version,
            state=0,
            elapsed=0,
            physical_teams=physical,
            travelled_from=[None] * len(physical),
            history=[],
        )
        with store_lock:
            sessions[sid] = sess
        log_event(sid, {"event": "created", "problem": pid, "policy_version": sess.policy_version})
        return session_payload(sid, sess)

    @app.get("/sessions/{sid}")
    def read_session(sid: str):
        sess = get_session(sid)
        with sess.lock:
            return session_payload(sid, sess)

    @app.post("/sessions/{sid}/report")
    async def report_outcomes(sid: str, request: Request):
        sess = get_session(sid)
        body = await request.json()
        try:
            reported = _parse_outcomes(body.get("outcomes"))
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        with sess.lock:
            entry = problems[sess.problem_id]
            mdp, policy = entry.solved
            state = sess.state
            remaining = max(0, policy.horizon - sess.elapsed)
            if mdp.terminal[state] or remaining <= 0:
                raise HTTPException(409, "session is already finished")
            action_index = choose(mdp, policy, state, remaining)
            rec = mdp.actions[state][action_index]

            match = None
            for t, (succ, p) in enumerate(rec.transitions):
                if _transition_delta(mdp, state, succ) == reported:
                    if match is not None:
                        raise RuntimeError("outcome matches more than one transition")
                    match = (t, succ)
            if match is None:
                raise HTTPException(
                    422,
                    {
                        "error": "reported outcomes match no transition of the current action",
                        "reported": {str(b): v for b, v in sorted(reported.items())},
                        "valid": [
                            {str(b): v for b, v in sorted(_transition_delta(mdp, state, succ).items())}
                            for succ, _ in rec.transitions
                        ],
                    },
                )

            t, succ = match
            if rec.commands is None:
                physical = sess.physical_teams
            else:
                physical_cmds = _physical_commands(mdp, rec.commands, sess.physical_teams)
                for i, c in enumerate(physical_cmds):
                    if c != WAIT and c != CONTINUE:
                        sess.travelled_from[i] = sess.physical_teams[i][0]
                physical = advance_teams(
                    sess.physical_teams, physical_cmds, rec.duration,
                    entry.system, clamp="W" in mdp.flags,
                )
                for i, (dest, rem) in enumerate(physical):
                    if rem == 0:
                        sess.travelled_from[i] = None
            if sorted(physical) != sorted(mdp.team_states[succ]):
                raise RuntimeError("physical team tracking diverged from the state table")

            sess.physical_teams = tuple(physical)
            sess.state = succ
            sess.elapsed += rec.duration
            sess.history.append(
                {
                    "state": state,
                    "action": action_index,
                    "transition": t,
                    "outcomes": {str(b): v for b, v in sorted(reported.items())},
                    "elapsed": sess.elapsed,
                }
            )
            log_event(
                sid,
                {
                    "event": "report",
                    "state": state,
                    "action": action_index,
                    "transition": t,
                    "outcomes": {str(b): v for b, v in sorted(reported.items())},
                },
            )
            return session_payload(sid, sess)

    @app.get("/sessions/{sid}/whatif")
    def whatif(sid: str, action: int):
        sess = get_session(sid)
        with sess.lock:
            entry = problems[sess.problem_id]
            mdp, policy = entry.solved
            remaining = max(0, policy.horizon - sess.elapsed)
            if not 0 <= action < len(mdp.actions[sess.state]):
                raise HTTPException(404, f"state has no action {action}")
            value = what_if(mdp, policy, sess.state, action, remaining)
            rec = mdp.actions[sess.state][action]
            if rec.commands is None:
                commands = None
            else:
                physical = _physical_commands(mdp, rec.commands, sess.physical_teams)
                commands = [command_to_json(i, c) for i, c in enumerate(physical)]
            return {"action": action, "value": value, "commands": commands}

    # ------------------------------------------------------------------
    # console bundle

    if console_dir is None:
        candidate = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        console_dir = os.environ.get("RESTORATION_CONSOLE_DIR") or candidate
    console_dir = Path(console_dir)
    if console_dir.is_dir():
        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app


app = create_app()
