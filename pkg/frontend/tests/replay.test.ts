import { describe, expect, it } from "vitest";

import { replayScreens } from "../src/replay.js";
import { countOccurrences, loadFixture } from "./helpers.js";

const short = loadFixture("session_short");
const route = loadFixture("session_route");

describe("recorded walk shape", () => {
  it("short walk is solve, two outcome reports, terminal", () => {
    expect(short.steps).toHaveLength(3);
    expect(short.steps[0]!.report).toBeUndefined();
    expect(short.steps[1]!.report).toBeDefined();
    expect(short.steps[2]!.report).toBeDefined();
    expect(short.steps[2]!.payload.terminal).toBe(true);
  });

  it("initial expected cost equals the solved value", () => {
    for (const recording of [short, route]) {
      expect(recording.steps[0]!.payload.expected_cost).toBeCloseTo(recording.solve.value, 10);
    }
  });
});

describe("replayScreens", () => {
  it("renders one screen per recorded step", () => {
    expect(replayScreens(short)).toHaveLength(3);
    expect(replayScreens(route)).toHaveLength(4);
  });

  it("reproduces the exact screen sequence on every replay", () => {
    expect(replayScreens(short)).toEqual(replayScreens(short));
    expect(replayScreens(route)).toEqual(replayScreens(route));
  });

  it("colors statuses as the walk unfolds", () => {
    const screens = replayScreens(short);
    expect(screens[0]).not.toContain('fill="#22c55e"');
    expect(countOccurrences(screens[1]!, 'fill="#22c55e"')).toBe(2);
    expect(countOccurrences(screens[2]!, 'fill="#ef4444"')).toBe(2);
  });

  it("keeps submission locked on the opening screen until outcomes are chosen", () => {
    const screens = replayScreens(short);
    expect(screens[0]).toContain('<button id="submit" disabled>');
  });

  it("ends the short walk with the completion banner", () => {
    const last = replayScreens(short).at(-1)!;
    expect(last).toContain("restoration complete: 2 energized, 2 damaged, 2 unreachable");
    expect(last).not.toContain('id="submit"');
  });

  it("ends the route walk with the moving team still on its arrow", () => {
    const last = replayScreens(route).at(-1)!;
    expect(last).toContain("restoration complete: 4 energized, 1 damaged, 1 unreachable");
    expect(last).toContain(">1 left</text>");
    expect(last).toContain('marker-end="url(#arrow)"');
  });
});
