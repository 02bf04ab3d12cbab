/** Thin typed client over the service HTTP API. The fetch function is
 * injected so tests can run against canned responses and so the client
 * never touches anything except the documented endpoints. */

import type {
  FieldPayload,
  HistoryPayload,
  JobState,
  MeshPayload,
  RunConfig,
  TurnResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx response; `detail` is the service's JSON "detail" field when
 * present, otherwise the raw body text. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function raise(res: Response): Promise<never> {
  let detail = "";
  try {
    const body = await res.json();
    detail = typeof body?.detail === "string" ? body.detail : JSON.stringify(body);
  } catch {
    detail = await res.text().catch(() => "");
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.base + path);
    if (!res.ok) await raise(res);
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) await raise(res);
    return (await res.json()) as T;
  }

  defaults(): Promise<RunConfig> {
    return this.getJson("/defaults");
  }

  newSession(): Promise<{ id: string }> {
    return this.postJson("/sessions");
  }

  chatTurn(sessionId: string, text: string, dim: number, lc: number): Promise<TurnResponse> {
    return this.postJson(`/sessions/${sessionId}/turn`, { text, dim, lc });
  }

  sessionMesh(sessionId: string): Promise<MeshPayload> {
    return this.getJson(`/sessions/${sessionId}/mesh`);
  }

  submitJob(config: RunConfig): Promise<{ id: string }> {
    return this.postJson("/jobs", config);
  }

  jobState(jobId: string): Promise<JobState> {
    return this.getJson(`/jobs/${jobId}`);
  }

  jobHistory(jobId: string): Promise<HistoryPayload> {
    return this.getJson(`/jobs/${jobId}/history`);
  }

  jobFields(jobId: string): Promise<{ names: string[] }> {
    return this.getJson(`/jobs/${jobId}/fields`);
  }

  jobField(jobId: string, name: string): Promise<FieldPayload> {
    return this.getJson(`/jobs/${jobId}/field?name=${encodeURIComponent(name)}`);
  }

  abortJob(jobId: string): Promise<{ id: string; state: string }> {
    return this.postJson(`/jobs/${jobId}/abort`);
  }
}
