"""Compare the compiled and pure-numpy solver lanes on the bundled problems.

Usage: python3 benchmarks/backends.py [--reps N]

Builds each problem once, then times repeated solves per backend and
reports median wall time.  Aborts loudly if the two lanes ever disagree
bitwise: they implement the same backup and must stay interchangeable.
"""

import argparse
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from gridrestore import build, longest_horizon, solve
from gridrestore.solver import available_backends
from gridrestore.system_model import load_problem

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

CASES = [
    ("six_bus", "SPOW"),
    ("nine_bus", "SPOW"),
    ("fifteen_bus", "SPOW"),
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args(argv)

    backends = available_backends()
    if "numba" not in backends:
        print("compiled lane unavailable; timing numpy only", file=sys.stderr)

    print(f"{'problem':<14} {'states':>8} {'horizon':>7}", end="")
    for backend in backends:
        print(f" {backend + ' (s)':>12}", end="")
    print(f" {'speedup':>8}" if len(backends) > 1 else "")

    for name, flags in CASES:
        system, _ = load_problem(PROBLEMS / f"{name}.json")
        mdp = build(system, flags)
        horizon = max(1, longest_horizon(mdp))

        timings = {}
        reference = None
        for backend in backends:
            # warm once so jit compilation stays out of the measurement
            policy = solve(mdp, horizon=horizon, backend=backend)
            if reference is None:
                reference = policy.values
            elif not np.array_equal(reference, policy.values):
                print(f"{name}: backends disagree, aborting", file=sys.stderr)
                return 1
            runs = []
            for _ in range(args.reps):
                t0 = time.perf_counter()
                solve(mdp, horizon=horizon, backend=backend)
                runs.append(time.perf_counter() - t0)
            timings[backend] = statistics.median(runs)

        print(f"{name:<14} {mdp.state_count:>8} {horizon:>7}", end="")
        for backend in backends:
            print(f" {timings[backend]:>12.4f}", end="")
        if len(backends) > 1:
            ratio = timings["numpy"] / timings["numba"]
            print(f" {ratio:>7.1f}x")
        else:
            print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
