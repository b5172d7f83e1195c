"""Reachability sets, outcome enumeration, cost counting."""

import random

import pytest

from gridrestore.energization import (
    D,
    E,
    U,
    attemptable,
    enumerate_outcomes,
    frontier,
    restorable,
    statuses_from_string,
    status_string,
    unenergized_count,
)
from support import exhaustive_outcome_distribution, load_example
from gridrestore.oracle import random_instance


@pytest.fixture(scope="module")
def six_bus():
    return load_example("six_bus")[0]


def s(text):
    return statuses_from_string(text)


def test_status_string_round_trip():
    assert status_string(s("EUUEDU")) == "EUUEDU"
    with pytest.raises(ValueError):
        statuses_from_string("EUX")


def test_frontier_initially_the_sources(six_bus):
    assert frontier(six_bus, s("UUUUUU")) == {0, 3}


def test_frontier_grows_from_energized_neighbors(six_bus):
    # bus 2 touches energized bus 1; bus 6 is blocked by damaged bus 5
    assert frontier(six_bus, s("EUUEDU")) == {1}


def test_restorable_stops_at_damage(six_bus):
    assert restorable(six_bus, s("EUUEDU")) == {1, 2}
    assert restorable(six_bus, s("UUUUUU")) == {0, 1, 2, 3, 4, 5}


def test_attemptable_needs_a_team_on_the_bus(six_bus):
    assert attemptable(six_bus, s("EUUEDU"), {1, 2}) == {1}
    assert attemptable(six_bus, s("EUUEDU"), {2}) == set()


def test_outcome_enumeration_cascades_under_parked_teams(six_bus):
    # teams on buses 2 and 3: the attempt on 2 can expose 3 immediately
    got = dict(enumerate_outcomes(six_bus, s("EUUEDU"), {1, 2}))
    assert got == {
        s("EDUEDU"): pytest.approx(0.5, abs=1e-12),
        s("EEEEDU"): pytest.approx(0.375, abs=1e-12),
        s("EEDEDU"): pytest.approx(0.125, abs=1e-12),
    }


def test_outcome_enumeration_without_attempts_is_identity(six_bus):
    got = enumerate_outcomes(six_bus, s("EUUEDU"), {0, 4})
    assert got == ((s("EUUEDU"), 1.0),)


def test_outcomes_skip_zero_probability_branches():
    system, _ = load_example("fifteen_bus")
    # bus 3 has pf 0: no damaged branch for it may appear
    statuses = tuple([E, E] + [U] * 13)
    for outcome, p in enumerate_outcomes(system, statuses, {2}):
        assert outcome[2] == E
        assert p > 0.0


def test_unenergized_count_counts_everything_not_energized(six_bus):
    assert unenergized_count(s("EUUEDU")) == 4
    assert unenergized_count(s("EEEEEE")) == 0
    assert unenergized_count(s("DDDDDD")) == 6


def test_outcome_probabilities_sum_to_one_on_random_states():
    rng = random.Random(7)
    for seed in range(40):
        system, _ = random_instance(seed, max_buses=6, max_teams=2)
        statuses = tuple(rng.choice((U, D, E)) for _ in range(system.bus_count))
        positions = {
            b for b in range(system.bus_count) if rng.random() < 0.5
        }
        outcomes = enumerate_outcomes(system, statuses, positions)
        assert sum(p for _, p in outcomes) == pytest.approx(1.0, abs=1e-12)


def test_outcome_enumeration_matches_exhaustive_simulation():
    rng = random.Random(11)
    for seed in range(30):
        system, _ = random_instance(seed, max_buses=6, max_teams=2)
        statuses = tuple(rng.choice((U, U, D, E)) for _ in range(system.bus_count))
        positions = {b for b in range(system.bus_count) if rng.random() < 0.6}
        got = dict(enumerate_outcomes(system, statuses, positions))
        want = exhaustive_outcome_distribution(system, statuses, positions)
        assert set(got) == set(want)
        for key, p in want.items():
            assert got[key] == pytest.approx(p, abs=1e-12)
