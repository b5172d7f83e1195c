/** Thin typed wrappers over the service endpoints. */

import type {
  JobBody,
  Outcome,
  ProblemDocument,
  SessionPayload,
  UploadResult,
  WhatIfResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public detail: unknown = null,
  ) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    body = null;
  }
  if (!response.ok) {
    const detail = body && typeof body === "object" && "detail" in body
      ? (body as { detail: unknown }).detail
      : body;
    const message = typeof detail === "string" ? detail : response.statusText;
    throw new ApiError(response.status, message, detail);
  }
  return body as T;
}

function post(payload: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  };
}

export function uploadProblem(doc: ProblemDocument): Promise<UploadResult> {
  return request("problems", post(doc));
}

export function startSolve(problem: string, flags = "SPOW"): Promise<{ job: string }> {
  return request(`problems/${problem}/solve`, post({ flags }));
}

export function jobStatus(problem: string, job: string): Promise<JobBody> {
  return request(`problems/${problem}/jobs/${job}`);
}

export function openSession(problem: string): Promise<SessionPayload> {
  return request("sessions", post({ problem }));
}

export function fetchSession(session: string): Promise<SessionPayload> {
  return request(`sessions/${session}`);
}

export function reportOutcomes(
  session: string,
  outcomes: Record<number, Outcome>,
): Promise<SessionPayload> {
  return request(`sessions/${session}/report`, post({ outcomes }));
}

export function whatIf(session: string, action: number): Promise<WhatIfResponse> {
  return request(`sessions/${session}/whatif?action=${action}`);
}
