import type {
  BuiltinOut,
  EnsembleOut,
  EvaluateIn,
  EvaluateOut,
  HeatmapOut,
  HistogramOut,
  MeasureIn,
  MeasureOut,
  MeasurePosError,
  PcaOut,
  SelectionOut,
  SeriesOut,
  SeriesQuery,
  SessionOut,
} from "./types.js";

/** Non-2xx service response carrying the structured error detail. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: Record<string, unknown>,
  ) {
    super(typeof detail["message"] === "string" ? (detail["message"] as string) : `HTTP ${status}`);
  }
}

/** Measure submission outcome; compile failures carry a source position
 * so the editor can place an inline marker instead of throwing. */
export type MeasureResult =
  | { ok: true; measure: MeasureOut }
  | { ok: false; error: MeasurePosError };

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function query(params: Record<string, unknown>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== null) search.set(key, String(value));
  }
  const text = search.toString();
  return text ? `?${text}` : "";
}

/** Typed HTTP client; every UI data access goes through here. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const response = await this.fetchFn(this.base + path, init);
    const payload = await response.json();
    if (!response.ok) {
      const detail = payload && typeof payload === "object" ? payload.detail : undefined;
      throw new ApiError(response.status, detail ?? { message: String(payload) });
    }
    return payload as T;
  }

  loadEnsemble(path: string): Promise<EnsembleOut> {
    return this.request("POST", "/ensembles", { path });
  }

  getEnsemble(ensembleId: string): Promise<EnsembleOut> {
    return this.request("GET", `/ensembles/${ensembleId}`);
  }

  getSeries(ensembleId: string, runId: string, q: SeriesQuery = {}): Promise<SeriesOut> {
    return this.request("GET", `/ensembles/${ensembleId}/runs/${runId}/series${query(q as Record<string, unknown>)}`);
  }

  createSession(ensembleId: string): Promise<SessionOut> {
    return this.request("POST", "/sessions", { ensemble_id: ensembleId });
  }

  getSession(sessionId: string): Promise<SessionOut> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  listBuiltins(): Promise<BuiltinOut[]> {
    return this.request("GET", "/builtins");
  }

  /** Submit a measure; a 422 becomes an inline error, not an exception. */
  async putMeasure(sessionId: string, measure: MeasureIn): Promise<MeasureResult> {
    try {
      const out = await this.request<MeasureOut>(
        "POST",
        `/sessions/${sessionId}/measures`,
        measure,
      );
      return { ok: true, measure: out };
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        return { ok: false, error: err.detail as unknown as MeasurePosError };
      }
      throw err;
    }
  }

  evaluate(sessionId: string, body: EvaluateIn): Promise<EvaluateOut> {
    return this.request("POST", `/sessions/${sessionId}/evaluate`, body);
  }

  heatmap(
    sessionId: string,
    stepMeasure: string,
    aggMeasure: string,
    window: { from?: number | null; to?: number | null } = {},
  ): Promise<HeatmapOut> {
    return this.request(
      "GET",
      `/sessions/${sessionId}/heatmap${query({
        step_measure: stepMeasure,
        agg_measure: aggMeasure,
        from: window.from,
        to: window.to,
      })}`,
    );
  }

  pca(
    sessionId: string,
    runId: string,
    q: { threshold?: number; max?: number; from?: number | null; to?: number | null } = {},
  ): Promise<PcaOut> {
    return this.request(
      "GET",
      `/sessions/${sessionId}/runs/${runId}/pca${query(q as Record<string, unknown>)}`,
    );
  }

  histogram(
    sessionId: string,
    runId: string,
    q: { measure: string; bins?: number; from?: number | null; to?: number | null },
  ): Promise<HistogramOut> {
    return this.request(
      "GET",
      `/sessions/${sessionId}/runs/${runId}/histogram${query(q as Record<string, unknown>)}`,
    );
  }

  putSelection(
    sessionId: string,
    body: { d_range?: [number, number]; beta_range?: [number, number]; run_ids?: string[] },
  ): Promise<SelectionOut> {
    return this.request("PUT", `/sessions/${sessionId}/selection`, body);
  }

  putWindow(sessionId: string, window: { from: number | null; to: number | null }): Promise<SessionOut> {
    return this.request("PUT", `/sessions/${sessionId}/window`, window);
  }
}
