// Thin typed client for the monitoring service. Errors surface the server's
// machine-readable {code, message} body verbatim so the UI can show it.

import type { ReviewBody, RunRecord, VizDocument } from './types.js';

export class ApiRejection extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, '');
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const code = body && typeof body.code === 'string' ? body.code : 'http_error';
      const message =
        body && typeof body.message === 'string'
          ? body.message
          : `request failed with status ${response.status}`;
      throw new ApiRejection(response.status, code, message);
    }
    return body as T;
  }

  health(): Promise<{ status: string }> {
    return this.request('/health');
  }

  listRuns(): Promise<{ runs: string[] }> {
    return this.request('/runs');
  }

  getRun(runId: string): Promise<RunRecord> {
    return this.request(`/runs/${encodeURIComponent(runId)}`);
  }

  getViz(runId: string): Promise<VizDocument> {
    return this.request(`/runs/${encodeURIComponent(runId)}/viz`);
  }

  createRun(article: string, focal: string, autoApprove = false): Promise<{ run_id: string }> {
    return this.request('/runs', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ article, focal, auto_approve: autoApprove }),
    });
  }

  submitReview(runId: string, body: ReviewBody): Promise<RunRecord> {
    return this.request(`/runs/${encodeURIComponent(runId)}/review`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }
}
