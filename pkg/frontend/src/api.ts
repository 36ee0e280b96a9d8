// Typed client over the engine's HTTP JSON API. Every displayed number
// comes from these calls; the UI never recomputes metrics client-side.

import { FilterSpec, encodeFilterSpec } from "./filterSpec.js";
import {
  BehavioralSummaryPayload,
  ConfigPayload,
  ConfusionPayload,
  DetailPayload,
  HistogramPayload,
  MetricsPayload,
  StatusPayload,
  ThresholdPointPayload,
  TopWordsPayload,
  UtterancePage,
  WarningPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ListOptions {
  sortField?: string;
  descending?: boolean;
  offset?: number;
  limit?: number;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (error) {
      throw new ApiError(0, "network_error", String(error));
    }
    if (!response.ok) {
      let code = "http_error";
      let message = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body === "object") {
          code = body.code ?? code;
          message = body.message ?? message;
        }
      } catch {
        // non-JSON error body; keep defaults
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  private query(spec: FilterSpec, extra?: Record<string, string>): string {
    const params = encodeFilterSpec(spec);
    for (const [key, value] of Object.entries(extra ?? {})) params.set(key, value);
    const text = params.toString();
    return text ? `?${text}` : "";
  }

  status(): Promise<StatusPayload> {
    return this.request("/admin/status");
  }

  config(): Promise<ConfigPayload> {
    return this.request("/config");
  }

  warnings(): Promise<{ warnings: WarningPayload[] }> {
    return this.request("/dashboard/warnings");
  }

  metrics(split: string, spec: FilterSpec): Promise<MetricsPayload> {
    return this.request(`/dataset_splits/${split}/metrics${this.query(spec)}`);
  }

  confusion(split: string, spec: FilterSpec, normalized: boolean): Promise<ConfusionPayload> {
    return this.request(
      `/dataset_splits/${split}/confusion_matrix${this.query(spec, {
        normalized: String(normalized),
      })}`,
    );
  }

  histogram(split: string, spec: FilterSpec): Promise<HistogramPayload> {
    return this.request(`/dataset_splits/${split}/confidence_histogram${this.query(spec)}`);
  }

  topWords(split: string, spec: FilterSpec, n: number): Promise<TopWordsPayload> {
    return this.request(`/dataset_splits/${split}/top_words${this.query(spec, { n: String(n) })}`);
  }

  behavioralSummary(split: string, pipelineId: string | null): Promise<BehavioralSummaryPayload> {
    const suffix = pipelineId ? `?pipeline_id=${encodeURIComponent(pipelineId)}` : "";
    return this.request(`/dataset_splits/${split}/behavioral_summary${suffix}`);
  }

  thresholdComparison(
    pipelineId: string | null,
    split: string,
  ): Promise<{ split: string; points: ThresholdPointPayload[] }> {
    const params = new URLSearchParams({ split });
    if (pipelineId) params.set("pipeline_id", pipelineId);
    return this.request(`/threshold_comparison?${params.toString()}`);
  }

  utterances(split: string, spec: FilterSpec, options: ListOptions = {}): Promise<UtterancePage> {
    const extra: Record<string, string> = {};
    if (options.sortField && options.sortField !== "id") extra.sort = options.sortField;
    if (options.descending) extra.descending = "true";
    extra.offset = String(options.offset ?? 0);
    extra.limit = String(options.limit ?? 20);
    return this.request(`/dataset_splits/${split}/utterances${this.query(spec, extra)}`);
  }

  detail(split: string, id: number, pipelineId: string | null): Promise<DetailPayload> {
    const suffix = pipelineId ? `?pipeline_id=${encodeURIComponent(pipelineId)}` : "";
    return this.request(`/dataset_splits/${split}/utterances/${id}${suffix}`);
  }

  setProposedAction(
    split: string,
    id: number,
    value: string,
  ): Promise<{ split: string; id: number; value: string; updated_at: string }> {
    return this.request(`/dataset_splits/${split}/utterances/${id}/proposed_action`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ value }),
    });
  }

  exportActionsUrl(): string {
    return `${this.baseUrl}/export/proposed_actions`;
  }
}
