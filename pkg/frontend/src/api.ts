// Thin client over the verification HTTP API.  All label-affecting state
// flows through submitDecisions; the UI keeps nothing the server does not.

import type { Submission, TaskSummary, TaskView } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** 409: the task changed under the annotator; the UI must reload it. */
export class StaleTaskError extends ApiError {
  constructor(message: string) {
    super(409, message);
    this.name = "StaleTaskError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly token: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {
      "Content-Type": "application/json",
      ...((init?.headers as Record<string, string>) ?? {}),
    };
    if (this.token) headers["X-Annotation-Token"] = this.token;
    const response = await this.fetchFn(`${this.baseUrl}${path}`, { ...init, headers });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (response.status === 409) throw new StaleTaskError(detail);
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listTasks(): Promise<TaskSummary[]> {
    return this.request<TaskSummary[]>("/api/tasks");
  }

  fetchTask(questionId: string): Promise<TaskView> {
    return this.request<TaskView>(`/api/tasks/${encodeURIComponent(questionId)}`);
  }

  submitDecisions(questionId: string, submission: Submission): Promise<TaskView> {
    return this.request<TaskView>(`/api/tasks/${encodeURIComponent(questionId)}/decisions`, {
      method: "POST",
      body: JSON.stringify(submission),
    });
  }
}
