"""Process construction: states, transitions, durations, flags."""

import math

import pytest

from gridrestore.actions import CONTINUE, WAIT
from gridrestore.energization import statuses_from_string, unenergized_count
from gridrestore.mdp_builder import (
    FLAG_SUBSETS,
    StateCapError,
    advance_teams,
    build,
    expand_action,
    flags_label,
    longest_horizon,
    normalize_flags,
)
from gridrestore.system_model import load_problem
from support import load_example


def s(text):
    return statuses_from_string(text)


SINGLE_BUS = {
    "buses": [{"id": 1, "pf": 0.25}],
    "branches": [],
    "sources": [1],
    "teams": [{"start": 1}],
    "travel": {"matrix": [[0]]},
}

TWO_BUS_SAFE = {
    "buses": [{"id": 1, "pf": 0.0}, {"id": 2, "pf": 0.0}],
    "branches": [[1, 2]],
    "sources": [1],
    "teams": [{"start": 1}],
    "travel": {"matrix": [[0, 1], [1, 0]]},
}


class TestFlags:
    def test_spellings_are_equivalent(self):
        assert normalize_flags("SOV") == normalize_flags("S+O+V") == {"S", "O", "V"}

    def test_windowed_arrivals_imply_fused_travel(self):
        assert normalize_flags("W") == {"W", "V"}
        assert flags_label("WV") == "W"

    def test_labels(self):
        assert flags_label("") == "-"
        assert flags_label("vops") == "SPOV"
        assert flags_label("WOPS") == "SPOW"

    def test_unknown_flag_rejected(self):
        with pytest.raises(ValueError, match="unknown reduction flag"):
            normalize_flags("X")

    def test_subset_table_is_complete(self):
        assert len(FLAG_SUBSETS) == 15
        assert len(set(FLAG_SUBSETS)) == 15


class TestAdvanceTeams:
    def test_worked_example(self, six_bus=None):
        system, _ = load_example("six_bus")
        moved = advance_teams(((0, 0), (2, 1)), (1, CONTINUE), 1, system)
        assert moved == ((1, 0), (2, 0))

    def test_waiting_team_holds_position(self):
        system, _ = load_example("six_bus")
        assert advance_teams(((4, 0),), (WAIT,), 1, system) == ((4, 0),)

    def test_overshoot_is_a_contract_violation(self):
        system, _ = load_example("six_bus")
        with pytest.raises(ValueError, match="overshoot"):
            advance_teams(((0, 0), (2, 1)), (1, CONTINUE), 2, system)

    def test_clamp_parks_early_arrivals(self):
        system, _ = load_example("six_bus")
        moved = advance_teams(((0, 0), (2, 2)), (1, CONTINUE), 2, system, clamp=True)
        assert moved == ((1, 0), (2, 0))


class TestExpandAction:
    def test_worked_state_successors(self):
        system, _ = load_example("six_bus")
        teams = ((0, 0), (2, 1))
        for flags in ("", "V", "W", "SPOW"):
            dt, leaves = expand_action(system, s("EUUEDU"), teams, (1, CONTINUE), flags)
            assert dt == 1
            probs = sorted(p for _, _, p in leaves)
            assert probs == [
                pytest.approx(0.125, abs=1e-12),
                pytest.approx(0.375, abs=1e-12),
                pytest.approx(0.5, abs=1e-12),
            ]
            for statuses, succ_teams, _ in leaves:
                assert succ_teams == ((1, 0), (2, 0))

    def test_fused_travel_jumps_to_first_arrival(self):
        system, _ = load_example("six_bus")
        # lone team drives 1 -> 6 (time 3): naive steps once, fused jumps
        teams = ((0, 0),)
        dt_naive, leaves_naive = expand_action(system, s("EEEEEU"), teams, (5,), "")
        dt_fused, leaves_fused = expand_action(system, s("EEEEEU"), teams, (5,), "V")
        assert dt_naive == 1
        assert leaves_naive[0][1] == ((5, 2),)
        assert dt_fused == 3
        assert leaves_fused[0][1] == ((5, 0),)
        # the fused arrival attempts the bus at once
        assert {st[5] for st, _, _ in leaves_fused} == {1, 2}

    def test_all_wait_is_rejected(self):
        system, _ = load_example("six_bus")
        with pytest.raises(ValueError, match="all-wait"):
            expand_action(system, s("UUUUUU"), ((0, 0),), (WAIT,), "")


class TestBuild:
    def test_single_bus_has_three_states(self):
        system, _ = load_problem(SINGLE_BUS)
        mdp = build(system)
        assert mdp.state_count == 3
        root = mdp.actions[0][0]
        assert root.commands is None and root.duration == 0 and root.rate == 0
        assert longest_horizon(mdp) == 0
        assert mdp.terminal == [False, True, True]

    def test_two_bus_line_longest_horizon(self):
        system, _ = load_problem(TWO_BUS_SAFE)
        mdp = build(system)
        assert longest_horizon(mdp) == 1

    def test_root_cascade_probabilities(self):
        system, _ = load_example("six_bus")
        mdp = build(system)
        root = mdp.actions[0][0]
        assert root.commands is None
        assert sum(p for _, p in root.transitions) == pytest.approx(1.0, abs=1e-12)
        # both parked teams sit on sources: four joint outcomes
        assert len(root.transitions) == 4

    def test_probabilities_sum_to_one_everywhere(self):
        system, _ = load_example("six_bus")
        for flags in ("", "V", "SPOW"):
            mdp = build(system, flags)
            for recs in mdp.actions:
                for rec in recs:
                    total = math.fsum(p for _, p in rec.transitions)
                    assert total == pytest.approx(1.0, abs=1e-12)

    def test_terminal_contract(self):
        system, _ = load_example("six_bus")
        mdp = build(system, "V")
        for k in range(mdp.state_count):
            if mdp.terminal[k]:
                recs = mdp.actions[k]
                assert len(recs) == 1
                rec = recs[0]
                assert rec.commands == (WAIT, WAIT)
                assert rec.duration == 1
                assert rec.transitions == ((k, 1.0),)
                assert rec.rate == unenergized_count(mdp.bus_states[k])

    def test_canonical_team_order_under_symmetry(self):
        system, _ = load_example("six_bus")
        mdp = build(system, "S")
        for teams in mdp.team_states:
            assert list(teams) == sorted(teams)

    def test_symmetry_shrinks_the_table(self):
        system, _ = load_example("six_bus")
        assert build(system, "S").state_count <= build(system).state_count

    def test_state_cap_reports_frontier(self):
        system, _ = load_example("six_bus")
        with pytest.raises(StateCapError) as err:
            build(system, max_states=5)
        assert err.value.states == 5
        assert err.value.frontier_size >= 0
        assert "partition" in str(err.value)

    def test_deterministic_rebuild(self):
        system, _ = load_example("six_bus")
        a = build(system, "SPOW")
        b = build(system, "SPOW")
        assert a.bus_states == b.bus_states
        assert a.team_states == b.team_states
        assert [[rec.transitions for rec in recs] for recs in a.actions] == [
            [rec.transitions for rec in recs] for recs in b.actions
        ]

    def test_progress_callback_fires(self):
        system, _ = load_example("six_bus")
        seen = []
        build(system, on_progress=lambda states, frontier: seen.append((states, frontier)))
        assert seen and seen[-1][1] == 0

    def test_metadata_counts(self):
        system, _ = load_example("six_bus")
        mdp = build(system, "V")
        assert mdp.meta["states"] == mdp.state_count
        assert mdp.meta["transitions"] == mdp.transition_count
        assert mdp.meta["flags"] == "V"
        assert mdp.meta["state_bound"] >= mdp.state_count

    def test_export_document_shape(self):
        system, _ = load_problem(TWO_BUS_SAFE)
        doc = build(system, "V").to_document()
        assert doc["states"][0]["actions"][0]["cascade"] is True
        goto = doc["states"][1]["actions"][0]
        assert goto["commands"] == [{"team": 1, "command": "goto", "bus": 2}]
        assert goto["duration"] == 1
