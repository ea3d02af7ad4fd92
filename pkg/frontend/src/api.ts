/** Typed client for the session-service endpoints.
 *
 * The fetch implementation is injectable for tests. Submits carry a
 * client-generated submission ID header so a retried POST is recognizable;
 * the server independently rejects duplicate trial submissions with 409,
 * which callers should treat as "already submitted, resync".
 */

import type { CurrentTrial, Rating, SessionInfo, SessionStatus, SubmitResult } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function submissionId(): string {
  let id = "";
  for (let i = 0; i < 16; i++) {
    id += Math.floor(Math.random() * 16).toString(16);
  }
  return id;
}

export class ApiClient {
  constructor(
    private base: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(listenerId: string): Promise<SessionInfo> {
    return this.request<SessionInfo>("/api/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ listener_id: listenerId }),
    });
  }

  sessionStatus(sessionId: string): Promise<SessionStatus> {
    return this.request<SessionStatus>(`/api/sessions/${sessionId}`);
  }

  currentTrial(sessionId: string): Promise<CurrentTrial> {
    return this.request<CurrentTrial>(`/api/sessions/${sessionId}/current-trial`);
  }

  submitRatings(
    sessionId: string,
    trialId: string,
    ratings: Rating[],
    submission: string = submissionId(),
  ): Promise<SubmitResult> {
    return this.request<SubmitResult>(
      `/api/sessions/${sessionId}/trials/${trialId}/ratings`,
      {
        method: "POST",
        headers: {
          "Content-Type": "application/json",
          "X-Submission-Id": submission,
        },
        body: JSON.stringify({ ratings }),
      },
    );
  }

  async fetchAudio(url: string): Promise<ArrayBuffer> {
    const absolute = url.startsWith("http") ? url : this.base + url;
    const response = await this.fetchFn(absolute);
    if (!response.ok) {
      throw new ApiError(response.status, `audio fetch failed for ${url}`);
    }
    return response.arrayBuffer();
  }

  async exportCsv(): Promise<string> {
    const response = await this.fetchFn(this.base + "/api/export.csv");
    if (!response.ok) {
      throw new ApiError(response.status, "export failed");
    }
    return response.text();
  }
}
