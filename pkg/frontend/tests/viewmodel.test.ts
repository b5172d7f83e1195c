import { describe, expect, it } from "vitest";

import {
  buildViewState,
  canSubmit,
  carryBadge,
  commandText,
  mixHex,
  sameDecisionPoint,
  selectionMatches,
  statusFill,
  toggleOutcome,
} from "../src/viewmodel.js";
import { clonePayload, loadFixture, payloadAt } from "./helpers.js";

const short = loadFixture("session_short");
const route = loadFixture("session_route");
const doc = short.problem;

describe("status colors", () => {
  it("shades unknown buses from gray toward yellow by failure probability", () => {
    expect(statusFill("unknown", 0)).toBe("#9ca3af");
    expect(statusFill("unknown", 1)).toBe("#eab308");
    expect(statusFill("unknown", 0.5)).toBe("#c3ab5c");
    expect(statusFill("unknown", 0.25)).toBe("#b0a785");
  });

  it("uses fixed fills for resolved buses", () => {
    expect(statusFill("energized", 0.9)).toBe("#22c55e");
    expect(statusFill("damaged", 0.1)).toBe("#ef4444");
  });

  it("clamps the mix parameter", () => {
    expect(mixHex("#000000", "#ffffff", -1)).toBe("#000000");
    expect(mixHex("#000000", "#ffffff", 2)).toBe("#ffffff");
  });
});

describe("selection and submission", () => {
  const decision = payloadAt(short, 1);

  it("stays disabled with no selection", () => {
    expect(canSubmit(decision, {})).toBe(false);
  });

  it("stays disabled while any attempted bus is missing an outcome", () => {
    expect(canSubmit(decision, { 2: "damaged" })).toBe(false);
    expect(canSubmit(decision, { 5: "energized" })).toBe(false);
  });

  it("enables once the selection matches one recorded option exactly", () => {
    expect(canSubmit(decision, { 2: "damaged", 5: "damaged" })).toBe(true);
    expect(canSubmit(decision, { 2: "energized", 5: "damaged" })).toBe(true);
  });

  it("rejects selections with extra buses", () => {
    expect(canSubmit(decision, { 2: "damaged", 5: "damaged", 3: "energized" })).toBe(false);
  });

  it("covers the initial cascade the same way", () => {
    const initial = payloadAt(short, 0);
    expect(initial.cascade).toBe(true);
    expect(canSubmit(initial, { 1: "energized" })).toBe(false);
    expect(canSubmit(initial, { 1: "energized", 4: "energized" })).toBe(true);
  });

  it("never enables on a terminal payload", () => {
    const terminal = payloadAt(short, 2);
    expect(terminal.terminal).toBe(true);
    expect(canSubmit(terminal, {})).toBe(false);
  });

  it("matches options key by key", () => {
    const option = decision.attempt_options[0]!;
    const exact = Object.fromEntries(
      Object.entries(option.outcomes).map(([bus, result]) => [Number(bus), result]),
    );
    expect(selectionMatches(option, exact)).toBe(true);
    expect(selectionMatches(option, {})).toBe(false);
  });

  it("toggles outcomes and clears on a repeated click", () => {
    let selection = toggleOutcome({}, 2, "damaged");
    expect(selection).toEqual({ 2: "damaged" });
    selection = toggleOutcome(selection, 2, "energized");
    expect(selection).toEqual({ 2: "energized" });
    selection = toggleOutcome(selection, 2, "energized");
    expect(selection).toEqual({});
  });
});

describe("buildViewState", () => {
  it("projects the initial payload", () => {
    const view = buildViewState(doc, payloadAt(short, 0));
    expect(view.error).toBeNull();
    expect(view.buses).toHaveLength(6);
    expect(view.buses.every((bus) => bus.status === "unknown")).toBe(true);
    expect(view.cascade).toBe(true);
    expect(view.commandLines).toEqual([]);
    expect(view.mustReport).toEqual([1, 4]);
    expect(view.expectedCost).toBeCloseTo(8.6875, 10);
    expect(view.banner).toBeNull();
  });

  it("renders command lines in physical team order", () => {
    const view = buildViewState(doc, payloadAt(short, 1));
    expect(view.commandLines).toEqual(["team 1: go to bus 2", "team 2: go to bus 5"]);
  });

  it("marks sources and selectable buses", () => {
    const view = buildViewState(doc, payloadAt(short, 1));
    const byId = new Map(view.buses.map((bus) => [bus.id, bus]));
    expect(byId.get(1)!.isSource).toBe(true);
    expect(byId.get(2)!.isSource).toBe(false);
    expect(byId.get(2)!.selectable).toBe(true);
    expect(byId.get(3)!.selectable).toBe(false);
  });

  it("builds the terminal banner from the summary", () => {
    const view = buildViewState(doc, payloadAt(short, 2));
    expect(view.banner).toBe("restoration complete: 2 energized, 2 damaged, 2 unreachable");
    expect(view.canSubmit).toBe(false);
  });

  it("reports horizon exhaustion distinctly", () => {
    const payload = clonePayload(payloadAt(short, 2));
    payload.terminal = false;
    payload.horizon_exhausted = true;
    const view = buildViewState(doc, payload);
    expect(view.banner).toBe("planning horizon exhausted after 1 periods");
  });

  it("places the en-route team on the arrow between its endpoints", () => {
    const view = buildViewState(route.problem, payloadAt(route, 3));
    const moving = view.teams.find((team) => team.kind === "enroute");
    expect(moving).toBeDefined();
    if (moving?.kind !== "enroute") throw new Error("unreachable");
    expect(moving.team).toBe(2);
    expect(moving.from).toBe(5);
    expect(moving.to).toBe(3);
    expect(moving.label).toBe("1 left");
    expect(moving.x).toBe(452);
    expect(moving.y).toBe(200);
    expect(moving.arrow).not.toBeNull();
  });

  it("turns history entries into readable lines", () => {
    const view = buildViewState(doc, payloadAt(short, 2));
    expect(view.historyLines).toEqual([
      "t=0: bus 1 energized, bus 4 energized",
      "t=1: bus 2 damaged, bus 5 damaged",
    ]);
  });

  it("rejects payloads that do not fit the document", () => {
    const payload = clonePayload(payloadAt(short, 0));
    payload.statuses = payload.statuses.slice(0, 3);
    const view = buildViewState(doc, payload);
    expect(view.error).toBe("session payload does not match the problem document");
    expect(view.buses).toEqual([]);
    expect(view.canSubmit).toBe(false);
  });
});

describe("what-if badges", () => {
  const decision = payloadAt(route, 1);
  const recorded = route.whatifs[0]!;

  it("attaches the badge to the matching alternative", () => {
    const view = buildViewState(doc, decision, {}, { action: recorded.action, value: recorded.value });
    const alt = view.alternatives.find((a) => a.action === recorded.action);
    expect(alt?.badge).toBe(recorded.value);
  });

  it("never undercuts the chosen action's expected cost", () => {
    for (const query of route.whatifs) {
      const payload = payloadAt(route, query.step);
      expect(query.value).toBeGreaterThanOrEqual(payload.expected_cost - 1e-9);
    }
  });

  it("survives a refresh of the same state", () => {
    const badge = { action: recorded.action, value: recorded.value };
    expect(carryBadge(badge, decision, clonePayload(decision))).toEqual(badge);
  });

  it("clears when the session state changes", () => {
    const badge = { action: recorded.action, value: recorded.value };
    expect(carryBadge(badge, decision, payloadAt(route, 2))).toBeNull();
    expect(sameDecisionPoint(decision, payloadAt(route, 2))).toBe(false);
  });
});

describe("commandText", () => {
  it("spells all three command kinds", () => {
    expect(commandText({ team: 1, command: "goto", bus: 2 })).toBe("team 1: go to bus 2");
    expect(commandText({ team: 2, command: "wait" })).toBe("team 2: wait");
    expect(commandText({ team: 3, command: "continue" })).toBe("team 3: continue");
  });
});
