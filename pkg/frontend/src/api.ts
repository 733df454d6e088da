/** Thin fetch client for the campaign control API.
 *
 * The base URL and fetch implementation are injectable so tests can run
 * against an in-memory fake. All GET failures raise ApiError; verdict
 * submission returns a structured result instead, because 409 (already
 * judged) is an expected outcome the queue must handle, not an exception.
 */

import type {
  AttemptDetail,
  AttemptSummary,
  InstanceRow,
  ReportPayload,
  StatusPayload,
  VerdictResult,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path);
    } catch (err) {
      throw new ApiError(`control API unreachable: ${String(err)}`, 0);
    }
    if (!response.ok) {
      throw new ApiError(`GET ${path} failed: ${response.status}`, response.status);
    }
    return (await response.json()) as T;
  }

  status(): Promise<StatusPayload> {
    return this.getJson("/api/status");
  }

  instances(): Promise<InstanceRow[]> {
    return this.getJson("/api/instances");
  }

  attempts(state?: string): Promise<AttemptSummary[]> {
    const query = state ? `?state=${encodeURIComponent(state)}` : "";
    return this.getJson(`/api/attempts${query}`);
  }

  attemptDetail(id: string): Promise<AttemptDetail> {
    return this.getJson(`/api/attempts/${encodeURIComponent(id)}`);
  }

  report(k: number): Promise<ReportPayload> {
    return this.getJson(`/api/report?k=${k}&format=json`);
  }

  async submitVerdict(id: string, verdict: "pass" | "fail", notes: string): Promise<VerdictResult> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}/api/attempts/${encodeURIComponent(id)}/verdict`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ verdict, notes }),
      });
    } catch (err) {
      return { ok: false, conflict: false, status: 0, error: String(err) };
    }
    const body = await response.json().catch(() => ({}));
    if (response.ok) {
      return { ok: true, conflict: false, status: response.status, attempt: body as AttemptSummary };
    }
    return {
      ok: false,
      conflict: response.status === 409,
      status: response.status,
      error: typeof body?.error === "string" ? body.error : `status ${response.status}`,
    };
  }
}
