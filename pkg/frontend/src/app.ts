/**
 * Browser bootstrap.  Holds the mutable console state, forwards clicks to
 * the service client, and re-renders the screen from each fresh payload.
 * At most one mutating request is in flight at any time.
 */

import { ApiError, jobStatus, openSession, reportOutcomes, startSolve, uploadProblem, whatIf } from "./client.js";
import type { Outcome, ProblemDocument, SessionPayload } from "./types.js";
import { buildViewState, carryBadge, toggleOutcome, type Selection, type WhatIfBadge } from "./viewmodel.js";
import { renderScreen } from "./render.js";

interface ConsoleState {
  doc: ProblemDocument | null;
  payload: SessionPayload | null;
  selection: Selection;
  badge: WhatIfBadge | null;
  busy: boolean;
}

const state: ConsoleState = {
  doc: null,
  payload: null,
  selection: {},
  badge: null,
  busy: false,
};

const root = document.getElementById("root")!;
const statusLine = document.getElementById("status")!;
const docInput = document.getElementById("problem-doc") as HTMLTextAreaElement;
const startButton = document.getElementById("start") as HTMLButtonElement;

function note(text: string): void {
  statusLine.textContent = text;
}

function render(): void {
  if (!state.doc || !state.payload) return;
  const view = buildViewState(state.doc, state.payload, state.selection, state.badge);
  root.innerHTML = renderScreen(view);
}

function acceptPayload(payload: SessionPayload): void {
  state.badge = carryBadge(state.badge, state.payload, payload);
  if (!state.payload || state.payload.elapsed !== payload.elapsed) {
    state.selection = {};
  }
  state.payload = payload;
  render();
}

async function pollJob(problem: string, job: string): Promise<void> {
  for (;;) {
    const body = await jobStatus(problem, job);
    if (body.status === "done") return;
    if (body.status === "error") {
      throw new ApiError(500, body.error ?? "solve failed");
    }
    const progress = body.progress;
    if (progress) {
      note(`solving: ${progress.states} states, frontier ${progress.frontier}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
}

async function start(): Promise<void> {
  let doc: ProblemDocument;
  try {
    doc = JSON.parse(docInput.value);
  } catch {
    note("problem document is not valid JSON");
    return;
  }
  startButton.disabled = true;
  try {
    note("uploading problem");
    const uploaded = await uploadProblem(doc);
    note(`solving ${uploaded.name} (${uploaded.buses} buses, ${uploaded.teams} teams)`);
    const { job } = await startSolve(uploaded.id);
    await pollJob(uploaded.id, job);
    note("opening session");
    const payload = await openSession(uploaded.id);
    state.doc = doc;
    state.payload = null;
    state.selection = {};
    state.badge = null;
    acceptPayload(payload);
    note("session ready");
  } catch (error) {
    if (error instanceof ApiError && error.status === 422 && error.detail) {
      note(`solve rejected: ${JSON.stringify(error.detail)}`);
    } else {
      note(error instanceof Error ? error.message : String(error));
    }
  } finally {
    startButton.disabled = false;
  }
}

async function submitReport(): Promise<void> {
  if (!state.payload || state.busy) return;
  state.busy = true;
  try {
    const payload = await reportOutcomes(state.payload.session, state.selection);
    acceptPayload(payload);
    note("report accepted");
  } catch (error) {
    if (error instanceof ApiError) {
      note(`report rejected: ${error.message}`);
    } else {
      throw error;
    }
  } finally {
    state.busy = false;
  }
}

async function exploreWhatIf(action: number): Promise<void> {
  if (!state.payload || state.busy) return;
  try {
    const response = await whatIf(state.payload.session, action);
    state.badge = { action: response.action, value: response.value };
    render();
  } catch (error) {
    note(error instanceof Error ? error.message : String(error));
  }
}

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const busAttr = target.dataset.bus;
  const outcomeAttr = target.dataset.outcome;
  if (busAttr && outcomeAttr) {
    state.selection = toggleOutcome(state.selection, Number(busAttr), outcomeAttr as Outcome);
    render();
    return;
  }
  if (target.id === "submit") {
    void submitReport();
    return;
  }
  if (target.classList.contains("whatif")) {
    void exploreWhatIf(Number(target.dataset.action));
  }
});

startButton.addEventListener("click", () => {
  void start();
});

note("paste a problem document and press solve");
