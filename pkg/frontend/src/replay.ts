/**
 * Session replay: feed a recorded walk through the same projection and
 * rendering the live console uses and get back one markup string per step.
 * Replaying the same file twice must produce identical sequences.
 */

import type { RecordedSession } from "./types.js";
import { buildViewState } from "./viewmodel.js";
import { renderScreen } from "./render.js";

export function replayScreens(recording: RecordedSession): string[] {
  return recording.steps.map((step) =>
    renderScreen(buildViewState(recording.problem, step.payload)),
  );
}
