"""Per-team commands and joint action enumeration with reductions.

A command is a small int: WAIT, CONTINUE, or a target bus index >= 0 for
"go to".  A joint action is a tuple with one command per team.  Teams are
pairs (destination, remaining travel time); remaining 0 means the team is
standing at its destination.
"""

from __future__ import annotations

from itertools import product

from .energization import frontier, restorable

WAIT = -1
CONTINUE = -2


def is_goto(command):
    return command >= 0


def command_target(command, team):
    """Bus the command is headed for, or None for a wait."""
    if command == WAIT:
        return None
    if command == CONTINUE:
        return team[0]
    return command


def feasible_commands(system, team, restorable_set):
    """Commands one team may issue, in deterministic order.

    En-route teams can only continue.  A parked team may go to any
    restorable bus other than its own, and may wait only if its own bus is
    still restorable (there is something to stay for).
    """
    dest, remaining = team
    if remaining > 0:
        return (CONTINUE,)
    cmds = []
    if dest in restorable_set:
        cmds.append(WAIT)
    cmds.extend(j for j in sorted(restorable_set) if j != dest)
    return tuple(cmds)


def _makes_progress(command, team, frontier_set):
    if command == WAIT:
        return team[0] in frontier_set
    return command_target(command, team) in frontier_set


def feasible_actions(system, statuses, teams, front=None, rest=None):
    """Joint actions for a state, already filtered by the progress rule.

    At least one command must be headed for (or holding) a frontier bus,
    so every action moves the restoration forward.  A state with an empty
    frontier is terminal and gets the single all-wait action.  ``front``
    and ``rest`` accept precomputed reachability sets.
    """
    if front is None:
        front = frontier(system, statuses)
    if not front:
        return [tuple([WAIT] * len(teams))]
    if rest is None:
        rest = restorable(system, statuses)
    per_team = [feasible_commands(system, team, rest) for team in teams]
    actions = [
        a
        for a in product(*per_team)
        if any(_makes_progress(c, t, front) for c, t in zip(a, teams))
    ]
    if not actions:
        raise AssertionError("non-terminal state with no feasible action")
    return actions


def eliminate_permutations(system, teams, actions):
    """Drop team-to-target assignments dominated by a reshuffle.

    Actions agreeing on everything except which parked team drives to
    which target are interchangeable up to arrival times.  Within such a
    class an action is dropped when another member reaches every target at
    least as fast; exact ties keep the first action in deterministic
    order.  Independently, any action containing a subset of goto teams
    that merely exchange their current buses is dropped outright.
    """
    classes = {}
    for idx, action in enumerate(actions):
        goto_teams = tuple(i for i, c in enumerate(action) if is_goto(c))
        targets = tuple(sorted(action[i] for i in goto_teams))
        classes.setdefault((goto_teams, targets), []).append((idx, action))

    keep = set()
    for (goto_teams, targets), members in classes.items():
        target_set = sorted(set(targets))
        scored = []
        for idx, action in members:
            dvec = tuple(
                min(system.time(teams[i][0], b) for i in goto_teams if action[i] == b)
                for b in target_set
            )
            scored.append((idx, action, dvec))
        for idx, action, dvec in scored:
            dominated = any(
                all(od <= d for od, d in zip(other_dvec, dvec))
                and (other_dvec != dvec or other_idx < idx)
                for other_idx, _, other_dvec in scored
                if other_idx != idx
            )
            if not dominated:
                keep.add(idx)

    kept = []
    for idx, action in enumerate(actions):
        if idx not in keep:
            continue
        if _has_position_swap(action, teams):
            continue
        kept.append(action)
    return kept


def _has_position_swap(action, teams):
    # a goto subset whose current buses equal its targets as sets gains
    # nothing: the same buses stay covered, only the drivers change
    goto = [(teams[i][0], action[i]) for i, c in enumerate(action) if is_goto(c)]
    m = len(goto)
    for mask in range(1, 1 << m):
        current = {goto[k][0] for k in range(m) if mask >> k & 1}
        target = {goto[k][1] for k in range(m) if mask >> k & 1}
        if current == target:
            return True
    return False


def eliminate_on_the_way(system, statuses, teams, actions, require_frontier_stop, front=None):
    """Drop gotos that drive straight past an equally good nearer stop.

    An action loses to a sibling differing only in one parked team's
    target c when c lies exactly on the way (travel times add up).  With
    windowed arrivals enabled the nearer stop must also be attemptable now,
    otherwise stopping there could stall the window.
    """
    if require_frontier_stop:
        if front is None:
            front = frontier(system, statuses)
    else:
        front = None
    siblings = {}
    for action in actions:
        for x, c in enumerate(action):
            if is_goto(c):
                siblings.setdefault((x, action[:x] + action[x + 1 :]), []).append(c)

    kept = []
    for action in actions:
        eliminated = False
        for x, c in enumerate(action):
            if not is_goto(c):
                continue
            pos = teams[x][0]
            direct = system.time(pos, c)
            for mid in siblings.get((x, action[:x] + action[x + 1 :]), ()):
                if mid == c:
                    continue
                if front is not None and mid not in front:
                    continue
                if system.time(pos, mid) + system.time(mid, c) == direct:
                    eliminated = True
                    break
            if eliminated:
                break
        if not eliminated:
            kept.append(action)
    return kept
