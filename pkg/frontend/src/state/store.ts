import type { ApiClient, MeasureResult } from "../api/client.js";
import type {
  EnsembleOut,
  EvaluateIn,
  EvaluateOut,
  HeatmapOut,
  HistogramOut,
  MeasureIn,
  MeasurePosError,
  PcaOut,
  SelectionOut,
  WindowOut,
} from "../api/types.js";
import { cellTooltip } from "../views/heatmap.js";
import type { ColorBy } from "../views/timeplot.js";

/** Timeplot requests are decimated server-side to stay fluid. */
export const TIMEPLOT_MAX_POINTS = 2000;

/** The subset of the HTTP client the store depends on; tests inject a
 * recording fake implementing the same shape. */
export type StoreApi = Pick<
  ApiClient,
  | "loadEnsemble"
  | "createSession"
  | "putMeasure"
  | "evaluate"
  | "heatmap"
  | "pca"
  | "histogram"
  | "putSelection"
  | "putWindow"
>;

export interface CellTooltipState {
  row: number;
  col: number;
  value: number;
  count: number;
  runs: string[];
  histogram: HistogramOut;
}

export interface StoreState {
  sessionId: string | null;
  ensemble: EnsembleOut | null;
  stepMeasure: string | null;
  aggMeasure: string | null;
  window: WindowOut;
  selection: SelectionOut;
  colorBy: ColorBy;
  detailRunId: string | null;
  heatmap: HeatmapOut | null;
  timeplot: EvaluateOut | null;
  pca: PcaOut | null;
  tooltip: CellTooltipState | null;
  measureError: MeasurePosError | null;
  timeCursor: number | null;
  lastError: string | null;
}

const INITIAL: StoreState = {
  sessionId: null,
  ensemble: null,
  stepMeasure: null,
  aggMeasure: null,
  window: { from: null, to: null },
  selection: { run_ids: [], origin: "single_point" },
  colorBy: "d",
  detailRunId: null,
  heatmap: null,
  timeplot: null,
  pca: null,
  tooltip: null,
  measureError: null,
  timeCursor: null,
  lastError: null,
};

type Listener = (state: StoreState) => void;

/** Client-side view state. The server session is the source of truth:
 * every mutation applies the server's response, mutations run one at a
 * time, and responses superseded by a newer request are discarded via
 * per-view sequence numbers. */
export class AppStore {
  private state: StoreState = INITIAL;
  private listeners: Listener[] = [];
  private mutationChain: Promise<unknown> = Promise.resolve();
  private tickets = { heatmap: 0, timeplot: 0, pca: 0, tooltip: 0 };

  constructor(private readonly api: StoreApi) {}

  getState(): StoreState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private setState(patch: Partial<StoreState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Serialize mutations: at most one is in flight at any moment. */
  private enqueue<T>(mutation: () => Promise<T>): Promise<T> {
    const run = this.mutationChain.then(mutation, mutation);
    this.mutationChain = run.then(
      () => undefined,
      () => undefined,
    );
    return run;
  }

  private requireSession(): string {
    const id = this.state.sessionId;
    if (id === null) throw new Error("no session is open");
    return id;
  }

  /** Load an ensemble by server-side path and open a session on it. */
  open(path: string): Promise<void> {
    return this.enqueue(async () => {
      const ensemble = await this.api.loadEnsemble(path);
      const session = await this.api.createSession(ensemble.ensemble_id);
      this.setState({
        ensemble,
        sessionId: session.session_id,
        selection: session.selection,
        window: session.window ?? { from: null, to: null },
        heatmap: null,
        timeplot: null,
        pca: null,
      });
    });
  }

  /** Submit a measure; on success it becomes the active measure of its
   * kind and the derived views refresh. Compile errors land in
   * `measureError` with their source position. */
  submitMeasure(measure: MeasureIn): Promise<MeasureResult> {
    return this.enqueue(async () => {
      const sessionId = this.requireSession();
      const result = await this.api.putMeasure(sessionId, measure);
      if (!result.ok) {
        this.setState({ measureError: result.error });
        return result;
      }
      const patch: Partial<StoreState> =
        measure.kind === "per_step"
          ? { stepMeasure: measure.name }
          : { aggMeasure: measure.name };
      this.setState({ ...patch, measureError: null });
      await Promise.all([this.refreshHeatmap(), this.refreshTimeplot()]);
      return result;
    });
  }

  /** Rectangle selection in parameter space; the timeplot then shows
   * exactly the runs the server reports selected. */
  selectRegion(dRange: [number, number], betaRange: [number, number]): Promise<void> {
    return this.enqueue(async () => {
      const sessionId = this.requireSession();
      const selection = await this.api.putSelection(sessionId, {
        d_range: dRange,
        beta_range: betaRange,
      });
      this.setState({ selection });
      await this.refreshTimeplot();
    });
  }

  /** Explicit run-id selection (point click or external list). */
  selectRuns(runIds: string[]): Promise<void> {
    return this.enqueue(async () => {
      const sessionId = this.requireSession();
      const selection = await this.api.putSelection(sessionId, { run_ids: runIds });
      this.setState({ selection });
      await this.refreshTimeplot();
    });
  }

  /** Set the analysis window; heatmap, timeplot, and PCA all refresh. */
  setWindow(from: number | null, to: number | null): Promise<void> {
    return this.enqueue(async () => {
      const sessionId = this.requireSession();
      const session = await this.api.putWindow(sessionId, { from, to });
      this.setState({ window: session.window ?? { from: null, to: null } });
      await Promise.all([
        this.refreshHeatmap(),
        this.refreshTimeplot(),
        this.refreshPca(),
      ]);
    });
  }

  /** Re-color only; no server round trip. */
  setColorBy(colorBy: ColorBy): void {
    this.setState({ colorBy });
  }

  /** Shared time cursor for the line plots and the animation. */
  setTimeCursor(time: number | null): void {
    this.setState({ timeCursor: time });
  }

  /** Open one run in the detail views and fetch its PCA. */
  openDetail(runId: string): Promise<void> {
    this.setState({ detailRunId: runId });
    return this.refreshPca();
  }

  /** Fetch the hover tooltip for a heatmap cell: its exact value plus a
   * histogram of the step measure over the cell's first run. */
  async hoverCell(row: number, col: number): Promise<void> {
    const { heatmap, stepMeasure, sessionId, window } = this.state;
    if (!heatmap || !stepMeasure || !sessionId) return;
    const info = cellTooltip(heatmap, row, col);
    if (!info || info.runs.length === 0) {
      this.setState({ tooltip: null });
      return;
    }
    const ticket = ++this.tickets.tooltip;
    try {
      const histogram = await this.api.histogram(sessionId, info.runs[0], {
        measure: stepMeasure,
        from: window.from,
        to: window.to,
      });
      if (ticket !== this.tickets.tooltip) return;
      this.setState({ tooltip: { row, col, ...info, histogram } });
    } catch (err) {
      if (ticket === this.tickets.tooltip) this.setState({ lastError: String(err) });
    }
  }

  clearTooltip(): void {
    this.setState({ tooltip: null });
  }

  private async refreshHeatmap(): Promise<void> {
    const { sessionId, stepMeasure, aggMeasure, window } = this.state;
    if (!sessionId || !stepMeasure || !aggMeasure) return;
    const ticket = ++this.tickets.heatmap;
    try {
      const heatmap = await this.api.heatmap(sessionId, stepMeasure, aggMeasure, window);
      if (ticket !== this.tickets.heatmap) return;
      this.setState({ heatmap, lastError: null });
    } catch (err) {
      if (ticket === this.tickets.heatmap) this.setState({ lastError: String(err) });
    }
  }

  private async refreshTimeplot(): Promise<void> {
    const { sessionId, stepMeasure, window, selection } = this.state;
    if (!sessionId || !stepMeasure) return;
    const ticket = ++this.tickets.timeplot;
    const body: EvaluateIn = {
      measure: stepMeasure,
      from: window.from,
      to: window.to,
      max_points: TIMEPLOT_MAX_POINTS,
    };
    if (selection.run_ids.length > 0) body.runs = [...selection.run_ids];
    try {
      const timeplot = await this.api.evaluate(sessionId, body);
      if (ticket !== this.tickets.timeplot) return;
      this.setState({ timeplot, lastError: null });
    } catch (err) {
      if (ticket === this.tickets.timeplot) this.setState({ lastError: String(err) });
    }
  }

  private async refreshPca(): Promise<void> {
    const { sessionId, detailRunId, window } = this.state;
    if (!sessionId || !detailRunId) return;
    const ticket = ++this.tickets.pca;
    try {
      const pca = await this.api.pca(sessionId, detailRunId, {
        from: window.from,
        to: window.to,
      });
      if (ticket !== this.tickets.pca) return;
      this.setState({ pca, lastError: null });
    } catch (err) {
      if (ticket === this.tickets.pca) this.setState({ lastError: String(err) });
    }
  }
}
