// Thin typed client over the service API. The fetch implementation is
// injectable so contract tests can replay recorded responses.

import type {
  ChecklistItem,
  Diagnostic,
  GraphStep,
  KpiSpecView,
  KpiStatus,
  PutResult,
  Suggestion,
  TraceResult,
  WorkspaceIndex,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly diagnostics: Diagnostic[] = [],
  ) {
    super(message);
  }
}

export class SafClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const text = await response.text();
    if (!response.ok) {
      let code = `http_${response.status}`;
      let message = text;
      let diagnostics: Diagnostic[] = [];
      try {
        const body = JSON.parse(text);
        code = body.code ?? code;
        message = body.message ?? message;
        diagnostics = body.diagnostics ?? [];
      } catch {
        // non-JSON error body: keep the raw text
      }
      throw new ApiError(response.status, code, message, diagnostics);
    }
    return JSON.parse(text) as T;
  }

  workspace(): Promise<WorkspaceIndex> {
    return this.request("/api/workspace");
  }

  async getModelText(kind: string, id: string): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/models/${kind}/${id}`);
    if (!response.ok) {
      throw new ApiError(response.status, `http_${response.status}`, await response.text());
    }
    return response.text();
  }

  putModel(kind: string, id: string, text: string, revision?: number): Promise<PutResult> {
    const headers: Record<string, string> = { "content-type": "text/plain" };
    if (revision !== undefined) {
      headers["if-match"] = String(revision);
    }
    return this.request(`/api/models/${kind}/${id}`, { method: "PUT", body: text, headers });
  }

  validate(): Promise<{ revision: number; diagnostics: Diagnostic[] }> {
    return this.request("/api/validate", { method: "POST" });
  }

  checklist(): Promise<{ revision: number; items: ChecklistItem[] }> {
    return this.request("/api/guidance/checklist");
  }

  stepGraph(answers: string[]): Promise<GraphStep> {
    return this.request("/api/guidance/decision-graph/step", {
      method: "POST",
      body: JSON.stringify({ answers }),
      headers: { "content-type": "application/json" },
    });
  }

  suggestions(dmId: string): Promise<{ revision: number; suggestions: Suggestion[] }> {
    return this.request(`/api/suggestions?dm=${encodeURIComponent(dmId)}`);
  }

  kpis(): Promise<{ revision: number; kpis: KpiSpecView[] }> {
    return this.request("/api/kpis");
  }

  kpiStatus(id: string, at?: string): Promise<KpiStatus> {
    const query = at ? `?at=${encodeURIComponent(at)}` : "";
    return this.request(`/api/kpis/${id}/status${query}`);
  }

  trace(id: string): Promise<TraceResult> {
    return this.request(`/api/kpis/${id}/trace`);
  }

  renderUrl(dmId: string): string {
    return `${this.baseUrl}/api/models/dm/${dmId}/render?format=svg`;
  }

  eventsUrl(): string {
    return `${this.baseUrl}/api/events`;
  }
}
