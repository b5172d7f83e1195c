/**
 * Pure projection from the latest session payload to everything the screen
 * shows.  No DOM, no network: buildViewState is a function of the problem
 * document, the payload, the operator's outcome selection, and an optional
 * what-if badge.  The render layer turns the result into markup strings.
 */

import type {
  AttemptOption,
  BusStatus,
  Outcome,
  ProblemDocument,
  SessionPayload,
  TeamCommand,
} from "./types.js";
import { layoutPositions, trimSegment, type Point } from "./layout.js";

export type Selection = Record<number, Outcome>;

export interface WhatIfBadge {
  action: number;
  value: number;
}

export interface ViewBus {
  id: number;
  status: BusStatus;
  pf: number;
  x: number;
  y: number;
  fill: string;
  isSource: boolean;
  selectable: boolean;
  selected: Outcome | null;
}

export interface ViewBranch {
  from: number;
  to: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface ViewTeamAt {
  kind: "at";
  team: number;
  bus: number;
  x: number;
  y: number;
}

export interface ViewTeamEnRoute {
  kind: "enroute";
  team: number;
  to: number;
  from: number | null;
  remaining: number;
  label: string;
  x: number;
  y: number;
  arrow: { x1: number; y1: number; x2: number; y2: number } | null;
}

export type ViewTeam = ViewTeamAt | ViewTeamEnRoute;

export interface ViewAlternative {
  action: number;
  value: number;
  chosen: boolean;
  commands: string[] | null;
  badge: number | null;
}

export interface ViewState {
  error: string | null;
  name: string;
  buses: ViewBus[];
  branches: ViewBranch[];
  teams: ViewTeam[];
  cascade: boolean;
  commandLines: string[];
  expectedCost: number | null;
  elapsed: number;
  remainingHorizon: number;
  terminal: boolean;
  horizonExhausted: boolean;
  banner: string | null;
  options: AttemptOption[];
  mustReport: number[];
  selection: Selection;
  canSubmit: boolean;
  alternatives: ViewAlternative[];
  historyLines: string[];
}

// unknown buses shade from gray toward yellow as failure gets likelier
const UNKNOWN_LOW = "#9ca3af";
const UNKNOWN_HIGH = "#eab308";
const ENERGIZED_FILL = "#22c55e";
const DAMAGED_FILL = "#ef4444";
const TEAM_OFFSET = 28;
const ARROW_INSET = 22;

export function mixHex(low: string, high: string, t: number): string {
  const clamped = Math.min(Math.max(t, 0), 1);
  const channel = (offset: number) => {
    const a = parseInt(low.slice(offset, offset + 2), 16);
    const b = parseInt(high.slice(offset, offset + 2), 16);
    return Math.round(a + (b - a) * clamped).toString(16).padStart(2, "0");
  };
  return `#${channel(1)}${channel(3)}${channel(5)}`;
}

export function statusFill(status: BusStatus, pf: number): string {
  if (status === "energized") return ENERGIZED_FILL;
  if (status === "damaged") return DAMAGED_FILL;
  return mixHex(UNKNOWN_LOW, UNKNOWN_HIGH, pf);
}

export function commandText(cmd: TeamCommand): string {
  if (cmd.command === "goto") return `team ${cmd.team}: go to bus ${cmd.bus}`;
  return `team ${cmd.team}: ${cmd.command}`;
}

/** True when the selection reproduces this option's outcomes exactly. */
export function selectionMatches(option: AttemptOption, selection: Selection): boolean {
  const keys = Object.keys(option.outcomes);
  if (keys.length !== Object.keys(selection).length) return false;
  return keys.every((key) => selection[Number(key)] === option.outcomes[key]);
}

export function canSubmit(payload: SessionPayload, selection: Selection): boolean {
  if (payload.terminal || payload.horizon_exhausted) return false;
  return payload.attempt_options.some((option) => selectionMatches(option, selection));
}

/** Toggle one bus outcome; clicking the selected value again clears it. */
export function toggleOutcome(selection: Selection, bus: number, outcome: Outcome): Selection {
  const next: Selection = { ...selection };
  if (next[bus] === outcome) {
    delete next[bus];
  } else {
    next[bus] = outcome;
  }
  return next;
}

export function sameDecisionPoint(a: SessionPayload, b: SessionPayload): boolean {
  return (
    a.session === b.session
    && a.elapsed === b.elapsed
    && JSON.stringify(a.statuses) === JSON.stringify(b.statuses)
    && JSON.stringify(a.teams) === JSON.stringify(b.teams)
  );
}

/** A badge survives only while the session still shows the same state. */
export function carryBadge(
  badge: WhatIfBadge | null,
  previous: SessionPayload | null,
  next: SessionPayload,
): WhatIfBadge | null {
  if (!badge || !previous) return null;
  return sameDecisionPoint(previous, next) ? badge : null;
}

function formatOutcomes(outcomes: Record<string, Outcome>): string {
  return Object.entries(outcomes)
    .sort((a, b) => Number(a[0]) - Number(b[0]))
    .map(([bus, result]) => `bus ${bus} ${result}`)
    .join(", ");
}

function bannerFor(payload: SessionPayload): string | null {
  const summary = payload.summary;
  if (payload.terminal) {
    if (!summary) return "restoration complete";
    return `restoration complete: ${summary.energized} energized, `
      + `${summary.damaged} damaged, ${summary.unknown} unreachable`;
  }
  if (payload.horizon_exhausted) {
    return `planning horizon exhausted after ${payload.elapsed} periods`;
  }
  return null;
}

function emptyView(name: string, error: string): ViewState {
  return {
    error,
    name,
    buses: [],
    branches: [],
    teams: [],
    cascade: false,
    commandLines: [],
    expectedCost: null,
    elapsed: 0,
    remainingHorizon: 0,
    terminal: false,
    horizonExhausted: false,
    banner: null,
    options: [],
    mustReport: [],
    selection: {},
    canSubmit: false,
    alternatives: [],
    historyLines: [],
  };
}

export function buildViewState(
  doc: ProblemDocument,
  payload: SessionPayload,
  selection: Selection = {},
  badge: WhatIfBadge | null = null,
): ViewState {
  const name = doc.name ?? "restoration";
  if (payload.statuses.length !== doc.buses.length) {
    return emptyView(name, "session payload does not match the problem document");
  }

  const positions = layoutPositions(doc);
  const sources = new Set(doc.sources);
  const selectable = new Set<number>();
  for (const option of payload.attempt_options) {
    for (const key of Object.keys(option.outcomes)) {
      selectable.add(Number(key));
    }
  }

  const buses: ViewBus[] = doc.buses.map((bus, i) => {
    const status = payload.statuses[i]!;
    return {
      id: bus.id,
      status,
      pf: bus.pf,
      x: positions.get(bus.id)!.x,
      y: positions.get(bus.id)!.y,
      fill: statusFill(status, bus.pf),
      isSource: sources.has(bus.id),
      selectable: selectable.has(bus.id),
      selected: selection[bus.id] ?? null,
    };
  });

  const branches: ViewBranch[] = doc.branches.map(([a, b]) => {
    const pa = positions.get(a)!;
    const pb = positions.get(b)!;
    return { from: a, to: b, x1: pa.x, y1: pa.y, x2: pb.x, y2: pb.y };
  });

  const teams: ViewTeam[] = payload.teams.map((marker) => {
    if (marker.at !== undefined) {
      const p = positions.get(marker.at)!;
      return { kind: "at", team: marker.team, bus: marker.at, x: p.x, y: p.y + TEAM_OFFSET };
    }
    const to = marker.to!;
    const dest = positions.get(to)!;
    const origin = marker.from !== undefined ? positions.get(marker.from) : undefined;
    let arrow: ViewTeamEnRoute["arrow"] = null;
    let chip: Point = dest;
    if (origin) {
      const [start, end] = trimSegment(origin, dest, ARROW_INSET);
      arrow = { x1: start.x, y1: start.y, x2: end.x, y2: end.y };
      chip = { x: (origin.x + dest.x) / 2, y: (origin.y + dest.y) / 2 };
    }
    return {
      kind: "enroute",
      team: marker.team,
      to,
      from: marker.from ?? null,
      remaining: marker.remaining ?? 0,
      label: `${marker.remaining ?? 0} left`,
      x: chip.x,
      y: chip.y,
      arrow,
    };
  });

  const finished = payload.terminal || payload.horizon_exhausted;
  const alternatives: ViewAlternative[] = payload.alternatives.map((alt) => ({
    action: alt.action,
    value: alt.value,
    chosen: alt.chosen,
    commands: alt.commands ? alt.commands.map(commandText) : null,
    badge: badge && badge.action === alt.action ? badge.value : null,
  }));

  return {
    error: null,
    name,
    buses,
    branches,
    teams,
    cascade: payload.cascade,
    commandLines: payload.commands ? payload.commands.map(commandText) : [],
    expectedCost: finished && payload.terminal ? null : payload.expected_cost,
    elapsed: payload.elapsed,
    remainingHorizon: payload.remaining_horizon,
    terminal: payload.terminal,
    horizonExhausted: payload.horizon_exhausted,
    banner: bannerFor(payload),
    options: payload.attempt_options,
    mustReport: payload.must_report,
    selection,
    canSubmit: canSubmit(payload, selection),
    alternatives,
    historyLines: payload.history.map(
      (entry) => `t=${entry.elapsed}: ${formatOutcomes(entry.outcomes)}`,
    ),
  };
}
