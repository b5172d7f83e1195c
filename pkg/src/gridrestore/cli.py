"""Command-line workflows around the restoration planner.

Subcommands:

* ``solve``      build + solve one problem, write a policy artifact
* ``export``     dump the built decision process as JSON (diagnostic)
* ``benchmark``  time every reduction combination, check value equality
* ``study``      re-solve topology variants (teams, branches, sources)
* ``verify``     sweep random instances against the reference model
* ``partition``  solve the document's partition groups independently
* ``serve``      run the HTTP service

Exit codes: 0 success, 1 correctness failure (value disagreement or a
violated monotonicity assertion), 2 validation error, 3 state cap hit.
Every run embeds its full configuration in the output: a ``# config``
header line on human-readable output, a ``config`` column in CSV, a
``"config"`` key in JSON artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
import time
from collections import Counter

from .mdp_builder import (
    DEFAULT_MAX_STATES,
    FLAG_SUBSETS,
    StateCapError,
    build,
    flags_label,
    longest_horizon,
    normalize_flags,
)
from .oracle import naive_longest_horizon, naive_process, naive_values, random_instance
from .partition import partition_groups, solve_partitioned
from .solver import solve
from .system_model import DistributionSystem, ProblemError, load_problem

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_CAP = 3

VALUE_TOL = 1e-9


def _load(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path} is not valid JSON: {exc}") from None
    system, warnings = load_problem(doc)
    return system, warnings, doc


def _flags(raw):
    flags = normalize_flags(raw)
    letters = set(str(raw).upper())
    if "W" in letters and "V" not in letters:
        print("note: W implies V", file=sys.stderr)
    return flags


def _resolve_cap(args):
    env = os.environ.get("RESTORATION_MAX_STATES")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ProblemError(
                f"RESTORATION_MAX_STATES must be an integer, got {env!r}"
            ) from None
    return args.max_states


def _config(args, **extra):
    cfg = {"command": args.command}
    for key, value in sorted(vars(args).items()):
        if key in ("command", "func") or callable(value):
            continue
        cfg[key] = value
    cfg.update(extra)
    return cfg


def _config_json(cfg):
    return json.dumps(cfg, sort_keys=True)


def _print_config(cfg):
    print(f"# config {_config_json(cfg)}")


def _write_csv(path, fieldnames, rows):
    handle = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if path:
            handle.close()


def _horizon_arg(text):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"horizon must be 'auto' or a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("horizon must be at least 1")
    return value


def _subset_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if part.lower() in ("-", "none"):
            part = ""
        out.append(part)
    return out


def _plus_label(flags):
    label = flags_label(flags)
    return label if label == "-" else "+".join(label)


# ----------------------------------------------------------------------
# solve / export


def cmd_solve(args):
    system, warnings, _ = _load(args.problem)
    flags = _flags(args.opt)
    cfg = _config(args, flags=flags_label(flags))
    _print_config(cfg)
    for note in warnings:
        print(f"note: {note}", file=sys.stderr)

    mdp = build(system, flags, max_states=_resolve_cap(args))
    policy = solve(mdp, horizon=args.horizon, backend=args.backend)
    value = float(policy.values[0])
    per_bus = value / system.bus_count

    print(f"problem      {system.name or args.problem}")
    print(f"flags        {flags_label(flags)}")
    print(f"states       {mdp.state_count}")
    print(f"transitions  {mdp.transition_count}")
    print(f"horizon      {policy.horizon}")
    print(f"backend      {policy.backend}")
    print(f"value        {value:.6f}")
    print(f"value/bus    {per_bus:.6f}")
    print(f"build_s      {mdp.meta['build_seconds']:.3f}")
    print(f"solve_s      {policy.solve_seconds:.3f}")

    if args.out:
        artifact = {
            "config": cfg,
            "problem": system.name or args.problem,
            "flags": flags_label(flags),
            "horizon": policy.horizon,
            "backend": policy.backend,
            "states": mdp.state_count,
            "transitions": mdp.transition_count,
            "value": value,
            "value_per_bus": per_bus,
            "values": [float(v) for v in policy.values],
            "chosen": [int(c) for c in policy.chosen],
        }
        with open(args.out, "w") as fh:
            json.dump(artifact, fh, indent=2)
            fh.write("\n")
        print(f"policy       {args.out}")
    return EXIT_OK


def cmd_export(args):
    system, warnings, _ = _load(args.problem)
    flags = _flags(args.opt)
    cfg = _config(args, flags=flags_label(flags))
    for note in warnings:
        print(f"note: {note}", file=sys.stderr)
    mdp = build(system, flags, max_states=_resolve_cap(args))
    doc = {"config": cfg}
    doc.update(mdp.to_document())
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote {doc['meta']['states']} states to {args.out}")
    else:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


# ----------------------------------------------------------------------
# benchmark


def cmd_benchmark(args):
    system, warnings, _ = _load(args.problem)
    cfg = _config(args)
    cfg_json = _config_json(cfg)
    status = sys.stdout if args.out else sys.stderr
    if args.out:
        _print_config(cfg)
    for note in warnings:
        print(f"note: {note}", file=sys.stderr)

    cap = _resolve_cap(args)
    subsets = args.subsets if args.subsets is not None else list(FLAG_SUBSETS)
    reps = args.reps

    built = []
    for raw in subsets:
        flags = normalize_flags(raw)
        build_times = []
        mdp = None
        for _ in range(reps):
            t0 = time.perf_counter()
            mdp = build(system, flags, max_states=cap)
            build_times.append(time.perf_counter() - t0)
        built.append((flags, mdp, statistics.median(build_times)))
        print(f"built {flags_label(flags):>7}  {mdp.state_count} states", file=status)

    if args.horizon == "auto":
        shared = max(max(1, longest_horizon(mdp)) for _, mdp, _ in built)
    else:
        shared = args.horizon

    rows = []
    values = []
    for flags, mdp, t_build in built:
        solve_times = []
        policy = None
        for _ in range(reps):
            t0 = time.perf_counter()
            policy = solve(mdp, horizon=shared, backend=args.backend)
            solve_times.append(time.perf_counter() - t0)
        t_solve = statistics.median(solve_times)
        value = float(policy.values[0])
        values.append((_plus_label(flags), value))
        rows.append(
            {
                "flags": _plus_label(flags),
                "states": mdp.state_count,
                "transitions": mdp.transition_count,
                "actions": mdp.action_count,
                "t_mdp_s": f"{t_build:.6f}",
                "t_total_s": f"{t_build + t_solve:.6f}",
                "value": f"{value:.9f}",
                "value_per_bus": f"{value / system.bus_count:.9f}",
                "value_equal": "",
                "config": cfg_json,
            }
        )

    baseline = values[0][1]
    all_equal = True
    for row, (_, value) in zip(rows, values):
        equal = abs(value - baseline) <= VALUE_TOL
        row["value_equal"] = "true" if equal else "false"
        all_equal = all_equal and equal

    if not all_equal:
        print("value disagreement across reduction combinations:", file=sys.stderr)
        for label, value in values:
            marker = "" if abs(value - baseline) <= VALUE_TOL else "  <-- differs"
            print(f"  {label:>7}  {value:.12f}{marker}", file=sys.stderr)
        print(
            f"baseline {values[0][0]} = {baseline:.12f}, horizon {shared}; "
            "this is a correctness failure, not a benchmark result",
            file=sys.stderr,
        )
        return EXIT_FAILURE

    fieldnames = list(rows[0].keys())
    _write_csv(args.out, fieldnames, rows)
    if args.out:
        print(f"benchmark: {len(rows)} rows, horizon {shared}, values agree -> {args.out}")
    return EXIT_OK


# ----------------------------------------------------------------------
# study


def _variant_system(system, vary, variant):
    """Derive a modified system for one study variant, 1-based input."""
    buses = system.bus_count

    def check_bus(b):
        if not isinstance(b, int) or not 1 <= b <= buses:
            raise ProblemError(f"variant references unknown bus {b!r}")
        return b - 1

    if vary == "teams":
        if not isinstance(variant, list) or not variant:
            raise ProblemError("a teams variant must be a non-empty array of start buses")
        starts = tuple(check_bus(b) for b in variant)
        return DistributionSystem(
            bus_count=buses,
            branches=system.branches,
            sources=system.sources,
            pf=system.pf,
            travel=system.travel,
            team_starts=starts,
            coords=system.coords,
            name=system.name,
        )
    if vary == "branches":
        if not isinstance(variant, list):
            raise ProblemError("a branches variant must be an array of [i, j] pairs")
        extra = set()
        for pair in variant:
            if not isinstance(pair, list) or len(pair) != 2:
                raise ProblemError(f"branch {pair!r} must be a [i, j] pair")
            i, j = (check_bus(b) for b in pair)
            if i == j:
                raise ProblemError(f"branch {pair!r} connects a bus to itself")
            extra.add((min(i, j), max(i, j)))
        branches = tuple(sorted(set(system.branches) | extra))
        return DistributionSystem(
            bus_count=buses,
            branches=branches,
            sources=system.sources,
            pf=system.pf,
            travel=system.travel,
            team_starts=system.team_starts,
            coords=system.coords,
            name=system.name,
        )
    if vary == "sources":
        if not isinstance(variant, list) or not variant:
            raise ProblemError("a sources variant must be a non-empty array of bus ids")
        sources = frozenset(check_bus(b) for b in variant)
        return DistributionSystem(
            bus_count=buses,
            branches=system.branches,
            sources=sources,
            pf=system.pf,
            travel=system.travel,
            team_starts=system.team_starts,
            coords=system.coords,
            name=system.name,
        )
    raise ProblemError(f"unknown study dimension {vary!r}")


def _variant_subset(vary, a, b):
    """True when variant a is contained in variant b (more of the same)."""
    if vary == "teams":
        ca, cb = Counter(a), Counter(b)
        return all(cb[k] >= n for k, n in ca.items())
    key = (lambda p: (min(p), max(p))) if vary == "branches" else (lambda x: x)
    return {key(x) for x in a} <= {key(x) for x in b}


def cmd_study(args):
    system, warnings, _ = _load(args.problem)
    flags = _flags(args.opt)
    cfg = _config(args, flags=flags_label(flags))
    cfg_json = _config_json(cfg)
    status = sys.stdout if args.out else sys.stderr
    if args.out:
        _print_config(cfg)
    for note in warnings:
        print(f"note: {note}", file=sys.stderr)

    try:
        with open(args.variants) as fh:
            variants = json.load(fh)
    except OSError as exc:
        raise ProblemError(f"cannot read {args.variants}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{args.variants} is not valid JSON: {exc}") from None
    if not isinstance(variants, list) or not variants:
        raise ProblemError("the variants file must hold a non-empty JSON array")

    cap = _resolve_cap(args)
    built = []
    for variant in variants:
        var_system = _variant_system(system, args.vary, variant)
        mdp = build(var_system, flags, max_states=cap)
        built.append((variant, var_system, mdp))
        print(f"built variant {json.dumps(variant)}: {mdp.state_count} states", file=status)

    if args.horizon == "auto":
        shared = max(max(1, longest_horizon(mdp)) for _, _, mdp in built)
    else:
        shared = args.horizon

    results = []
    for variant, var_system, mdp in built:
        policy = solve(mdp, horizon=shared, backend=args.backend)
        results.append((variant, var_system, mdp, float(policy.values[0])))

    # more teams, more branches, or more sources must never cost more
    violations = []
    notes = [[] for _ in results]
    for i, (va, _, _, value_a) in enumerate(results):
        for j, (vb, _, _, value_b) in enumerate(results):
            if i == j or not _variant_subset(args.vary, va, vb):
                continue
            notes[j].append(f"contains variant {i}")
            if value_b > value_a + VALUE_TOL:
                violations.append((i, j, value_a, value_b))

    rows = []
    for k, (variant, var_system, mdp, value) in enumerate(results):
        rows.append(
            {
                "variant": json.dumps(variant),
                "flags": flags_label(flags),
                "states": mdp.state_count,
                "horizon": shared,
                "value": f"{value:.9f}",
                "value_per_bus": f"{value / var_system.bus_count:.9f}",
                "note": "; ".join(notes[k]),
                "config": cfg_json,
            }
        )
    _write_csv(args.out, list(rows[0].keys()), rows)

    if violations:
        for i, j, value_a, value_b in violations:
            print(
                f"monotonicity violated: variant {j} contains variant {i} "
                f"but costs more ({value_b:.9f} > {value_a:.9f}, horizon {shared})",
                file=sys.stderr,
            )
        return EXIT_FAILURE
    if args.out:
        print(f"study: {len(rows)} variants, horizon {shared} -> {args.out}")
    return EXIT_OK


# ----------------------------------------------------------------------
# verify


def cmd_verify(args):
    cfg = _config(args)
    _print_config(cfg)
    subsets = args.subsets if args.subsets is not None else ["", "V", "W", "P", "O", "S", "SPOV", "SPOW"]

    failures = 0
    for seed in range(args.start_seed, args.start_seed + args.seeds):
        system, doc = random_instance(seed, max_buses=args.max_buses, max_teams=args.max_teams)
        _, entries = naive_process(system)
        horizon = max(1, naive_longest_horizon(entries))
        expected = float(naive_values(entries, horizon)[0])

        bad = []
        for raw in subsets:
            flags = normalize_flags(raw)
            mdp = build(system, flags)
            policy = solve(mdp, horizon=horizon, backend=args.backend)
            got = float(policy.values[0])
            if abs(got - expected) > VALUE_TOL:
                bad.append((flags_label(flags), got))
        if bad:
            failures += 1
            dump = f"verify-failure-seed{seed}.json"
            with open(dump, "w") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
            print(f"seed {seed}: MISMATCH (reference {expected:.12f}, horizon {horizon})")
            for label, got in bad:
                print(f"    {label:>7}  {got:.12f}  (diff {got - expected:+.3e})")
            print(f"    instance dumped to {dump}")
        else:
            print(
                f"seed {seed}: ok  buses={system.bus_count} teams={system.team_count} "
                f"horizon={horizon} value={expected:.6f} subsets={len(subsets)}"
            )

    if failures:
        print(f"{failures} of {args.seeds} seeds disagreed with the reference model")
        return EXIT_FAILURE
    print(f"all {args.seeds} seeds agree with the reference model (tolerance {VALUE_TOL})")
    return EXIT_OK


# ----------------------------------------------------------------------
# partition


def cmd_partition(args):
    system, warnings, doc = _load(args.problem)
    flags = _flags(args.opt)
    cfg = _config(args, flags=flags_label(flags))
    cfg_json = _config_json(cfg)
    _print_config(cfg)
    for note in warnings:
        print(f"note: {note}", file=sys.stderr)

    groups = partition_groups(doc, system)
    report = solve_partitioned(
        system,
        groups,
        flags,
        horizon=args.horizon,
        max_states=_resolve_cap(args),
        backend=args.backend,
        workers=args.threads,
    )

    print(f"groups       {len(report.groups)}")
    print(f"severed      {len(report.severed)} branches")
    for warning in report.warnings:
        print(f"warning: {warning}")
    if report.severed:
        print("warning: severed branches make the decomposition sub-optimal")
    print(f"horizon      {report.horizon}")
    for g in report.groups:
        print(
            f"  {g.name:<12} buses={len(g.buses)} states={g.states} "
            f"value={g.value:.6f} ({g.seconds:.3f}s)"
        )
    print(f"total value  {report.total_value:.6f}")
    print(f"value/bus    {report.total_value / system.bus_count:.6f}")

    if args.out:
        rows = [
            {
                "group": g.name,
                "buses": len(g.buses),
                "states": g.states,
                "transitions": g.transitions,
                "horizon": g.horizon,
                "value": f"{g.value:.9f}",
                "seconds": f"{g.seconds:.6f}",
                "severed_branches": len(report.severed),
                "config": cfg_json,
            }
            for g in report.groups
        ]
        _write_csv(args.out, list(rows[0].keys()), rows)
        print(f"report       {args.out}")
    return EXIT_OK


# ----------------------------------------------------------------------
# serve


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    app = create_app(
        max_states=_resolve_cap(args),
        session_log_dir=args.session_log,
        console_dir=args.console,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# ----------------------------------------------------------------------
# parser


def _add_common(parser, flags_default="SPOW"):
    parser.add_argument("--opt", default=flags_default, metavar="FLAGS",
                        help=f"reduction flags over V,P,W,O,S (default: {flags_default})")
    parser.add_argument("--horizon", type=_horizon_arg, default="auto",
                        help="planning horizon, 'auto' uses the longest restoration path")
    parser.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES,
                        help="reachable-state cap (RESTORATION_MAX_STATES overrides)")
    parser.add_argument("--backend", default=None, choices=["numpy", "numba"],
                        help="solver backend (default: numba when available)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gridrestore",
        description="Exact restoration planning for damaged distribution systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="build and solve one problem")
    p.add_argument("problem", help="problem document (JSON)")
    _add_common(p)
    p.add_argument("--out", default=None, help="write the policy artifact here (JSON)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export", help="dump the built decision process as JSON")
    p.add_argument("problem")
    _add_common(p)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("benchmark", help="time every reduction combination")
    p.add_argument("problem")
    _add_common(p)
    p.add_argument("--subsets", type=_subset_list, default=None, metavar="LIST",
                   help="comma-separated flag subsets ('-' for none; default: the 15 standard ones)")
    p.add_argument("--reps", type=int, default=1, help="repetitions per subset, median reported")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("study", help="re-solve topology variants")
    p.add_argument("problem")
    _add_common(p)
    p.add_argument("--vary", required=True, choices=["teams", "branches", "sources"],
                   help="which dimension the variants change")
    p.add_argument("--variants", required=True,
                   help="JSON array: team-start tuples, extra branch sets, or source sets")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("verify", help="sweep random instances against the reference model")
    _add_common(p)
    p.add_argument("--seeds", type=int, default=25, help="number of random instances")
    p.add_argument("--start-seed", type=int, default=0)
    p.add_argument("--max-buses", type=int, default=6)
    p.add_argument("--max-teams", type=int, default=2)
    p.add_argument("--subsets", type=_subset_list, default=None, metavar="LIST",
                   help="flag subsets to check (default: a representative eight)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("partition", help="solve the document's partition groups independently")
    p.add_argument("problem")
    _add_common(p)
    p.add_argument("--threads", type=int, default=None, help="cap on concurrent group solves")
    p.add_argument("--out", default=None, help="per-group CSV path")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.add_argument("--session-log", default=None, help="directory for session JSONL logs")
    p.add_argument("--console", default=None, help="directory with the console bundle")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StateCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
