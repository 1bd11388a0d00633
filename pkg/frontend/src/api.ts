// Typed client for the service. All server mutations in the app go through
// this module, and error payloads are carried verbatim so views can surface
// the server's own message.

import type {
  DatasetView,
  DraftObj,
  DraftView,
  ErrorPayload,
  GenieRequestObj,
  GenieSubmitResult,
  GenieTicket,
  GraphObj,
  GraphValidateResult,
  JobView,
  ModelView,
  Report,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly payload: ErrorPayload | null;

  constructor(status: number, payload: ErrorPayload | null, fallback: string) {
    super(payload?.error?.message ?? fallback);
    this.status = status;
    this.payload = payload;
  }

  get code(): string {
    return this.payload?.error?.code ?? "http";
  }

  get detail(): Record<string, unknown> {
    return this.payload?.error?.detail ?? {};
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, null, `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let payload: ErrorPayload | null = null;
      try {
        payload = (await response.json()) as ErrorPayload;
      } catch {
        payload = null;
      }
      throw new ApiError(response.status, payload, `HTTP ${response.status}`);
    }
    return (await response.json()) as T;
  }

  listModels(params: Record<string, string> = {}): Promise<ModelView[]> {
    const query = new URLSearchParams(params).toString();
    return this.request("GET", query ? `/models?${query}` : "/models");
  }

  getModel(modelId: string): Promise<ModelView> {
    return this.request("GET", `/models/${modelId}`);
  }

  lineage(modelId: string): Promise<ModelView[]> {
    return this.request("GET", `/models/${modelId}/lineage`);
  }

  saveDraft(draft: DraftObj, draftId: string | null): Promise<{ draft_id: string; revision: number }> {
    return this.request("POST", "/drafts", { draft, draft_id: draftId });
  }

  getDraft(draftId: string): Promise<DraftView> {
    return this.request("GET", `/drafts/${draftId}`);
  }

  validateGraph(graph: GraphObj): Promise<GraphValidateResult> {
    return this.request("POST", "/graph/validate", { graph });
  }

  validate(config: Record<string, unknown>, budgetS: number | null): Promise<Report> {
    return this.request("POST", "/validate", { config, budget_s: budgetS });
  }

  submitJob(config: Record<string, unknown>, author: string): Promise<{ job_id: string }> {
    return this.request("POST", "/jobs", { config, author, publish: true });
  }

  listJobs(): Promise<JobView[]> {
    return this.request("GET", "/jobs");
  }

  getJob(jobId: string): Promise<JobView> {
    return this.request("GET", `/jobs/${jobId}`);
  }

  jobAction(jobId: string, action: "pause" | "resume" | "terminate"): Promise<JobView> {
    return this.request("POST", `/jobs/${jobId}/${action}`);
  }

  listDatasets(): Promise<DatasetView[]> {
    return this.request("GET", "/datasets");
  }

  submitGenie(request: GenieRequestObj): Promise<GenieSubmitResult> {
    return this.request("POST", "/genie", request);
  }

  genieTicket(ticketId: string): Promise<GenieTicket> {
    return this.request("GET", `/genie/${ticketId}`);
  }
}
