/**
 * Wire types for the restoration service.  These mirror the JSON bodies the
 * backend produces; the console never reshapes them before projection.
 */

export type BusStatus = "unknown" | "damaged" | "energized";
export type Outcome = "energized" | "damaged";

export interface ProblemBus {
  id: number;
  pf: number;
  coord?: [number, number];
}

export interface ProblemDocument {
  name?: string;
  buses: ProblemBus[];
  branches: [number, number][];
  sources: number[];
  teams: { start: number }[];
  travel?: { divisor?: number; rounding?: string };
  partitions?: { name: string; buses: number[] }[];
}

/** Parked marker carries `at`; a moving team carries `to`/`remaining`. */
export interface TeamMarker {
  team: number;
  at?: number;
  to?: number;
  remaining?: number;
  from?: number;
}

export interface TeamCommand {
  team: number;
  command: "wait" | "continue" | "goto";
  bus?: number;
}

export interface AttemptOption {
  outcomes: Record<string, Outcome>;
  p: number;
}

export interface Alternative {
  action: number;
  value: number;
  commands: TeamCommand[] | null;
  chosen: boolean;
}

export interface HistoryEntry {
  state: number;
  action: number;
  transition: number;
  outcomes: Record<string, Outcome>;
  elapsed: number;
}

export interface SessionSummary {
  energized: number;
  damaged: number;
  unknown: number;
  elapsed: number;
  reason: string;
}

export interface SessionPayload {
  session: string;
  problem: string;
  policy_version: number;
  statuses: BusStatus[];
  teams: TeamMarker[];
  elapsed: number;
  remaining_horizon: number;
  terminal: boolean;
  horizon_exhausted: boolean;
  history: HistoryEntry[];
  commands: TeamCommand[] | null;
  cascade: boolean;
  action?: number;
  expected_cost: number;
  attempt_options: AttemptOption[];
  must_report: number[];
  alternatives: Alternative[];
  summary?: SessionSummary;
}

export interface WhatIfResponse {
  action: number;
  value: number;
  commands: TeamCommand[] | null;
}

export interface SolveResult {
  policy_version: number;
  states: number;
  transitions: number;
  horizon: number;
  value: number;
  seconds: number;
  backend: string;
}

export interface JobBody {
  id?: string;
  status: string;
  flags?: string;
  progress?: { states: number; frontier: number };
  result?: SolveResult;
  error?: string;
  hint?: string;
}

export interface UploadResult {
  id: string;
  name: string;
  buses: number;
  teams: number;
  warnings: string[];
}

/** One step of a recorded session: the report applied, then the payload seen. */
export interface RecordedStep {
  report?: Record<string, Outcome>;
  payload: SessionPayload;
}

export interface RecordedWhatIf extends WhatIfResponse {
  step: number;
}

export interface RecordedSession {
  problem: ProblemDocument;
  solve: SolveResult;
  steps: RecordedStep[];
  whatifs: RecordedWhatIf[];
}
