import type { RecordedSession, SessionPayload } from "../src/types.js";
import routeFixture from "../fixtures/session_route.json";
import shortFixture from "../fixtures/session_short.json";

const FIXTURES = {
  session_short: shortFixture,
  session_route: routeFixture,
};

/** Deep copy so one test's mutations never leak into another. */
export function loadFixture(name: keyof typeof FIXTURES): RecordedSession {
  return JSON.parse(JSON.stringify(FIXTURES[name])) as unknown as RecordedSession;
}

export function payloadAt(recording: RecordedSession, step: number): SessionPayload {
  return recording.steps[step]!.payload;
}

export function clonePayload(payload: SessionPayload): SessionPayload {
  return JSON.parse(JSON.stringify(payload)) as SessionPayload;
}

export function countOccurrences(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}
