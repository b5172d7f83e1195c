"""Reference-implementation cross-checks.

The oracle shares only the system container and the energization kernels
with the optimized path, so value agreement across every reduction flag is
the load-bearing correctness evidence of the package.
"""

import pytest

from gridrestore.mdp_builder import FLAG_SUBSETS, build
from gridrestore.oracle import (
    naive_longest_horizon,
    naive_process,
    naive_values,
    oracle_value,
    random_instance,
)
from gridrestore.solver import solve
from gridrestore.system_model import load_problem
from support import load_example


def test_random_instance_is_deterministic():
    _, doc_a = random_instance(123)
    _, doc_b = random_instance(123)
    assert doc_a == doc_b
    _, doc_c = random_instance(124)
    assert doc_c != doc_a


def test_random_instance_respects_bounds():
    for seed in range(25):
        system, _ = random_instance(seed, max_buses=6, max_teams=2)
        assert 2 <= system.bus_count <= 6
        assert 1 <= system.team_count <= 2
        assert system.sources
        assert all(pf in (0.0, 0.25, 0.5, 1.0) for pf in system.pf)


def test_naive_two_bus_line():
    system, _ = load_problem(
        {
            "buses": [{"id": 1, "pf": 0.0}, {"id": 2, "pf": 0.0}],
            "branches": [[1, 2]],
            "sources": [1],
            "teams": [{"start": 1}],
            "travel": {"matrix": [[0, 1], [1, 0]]},
        }
    )
    states, entries = naive_process(system)
    assert entries[0][0] == "cascade"
    assert naive_longest_horizon(entries) == 1
    assert naive_values(entries, 5)[0] == pytest.approx(1.0, abs=1e-12)
    assert oracle_value(system, 5) == pytest.approx(1.0, abs=1e-12)


def test_flag_subsets_match_oracle_on_small_instances():
    # the full 100-instance sweep lives in the acceptance suite; this is
    # the fast regression version
    for seed in range(12):
        system, doc = random_instance(seed, max_buses=5, max_teams=2)
        _, entries = naive_process(system)
        horizon = max(1, naive_longest_horizon(entries))
        want = naive_values(entries, horizon)[0]
        for flags in ("", "V", "W", "P", "O", "S", "SPOV", "SPOW"):
            mdp = build(system, flags)
            got = solve(mdp, horizon=horizon).values[0]
            assert got == pytest.approx(want, abs=1e-9), (
                f"seed {seed} flags {flags!r}: {got} != {want}\n{doc}"
            )


def test_flag_subsets_match_oracle_at_other_horizons():
    # value equality holds at every horizon, not only the natural one
    for seed in (3, 8, 21):
        system, doc = random_instance(seed, max_buses=5, max_teams=2)
        _, entries = naive_process(system)
        natural = max(1, naive_longest_horizon(entries))
        for horizon in (1, max(1, natural // 2), natural + 3):
            want = naive_values(entries, horizon)[0]
            for flags in ("", "V", "SPOW"):
                got = solve(build(system, flags), horizon=horizon).values[0]
                assert got == pytest.approx(want, abs=1e-9), (
                    f"seed {seed} flags {flags!r} horizon {horizon}: {got} != {want}\n{doc}"
                )


def test_six_bus_value_equality_across_all_subsets():
    system, _ = load_example("six_bus")
    _, entries = naive_process(system)
    horizon = max(1, naive_longest_horizon(entries))
    want = naive_values(entries, horizon)[0]
    for flags in FLAG_SUBSETS:
        got = solve(build(system, flags), horizon=horizon).values[0]
        assert got == pytest.approx(want, abs=1e-9), flags
