/** Wire types of the analysis service. Field names match the JSON
 * payloads exactly; window bounds travel as "from"/"to". */

export type MeasureKind = "per_step" | "aggregate";

export interface RunSummary {
  id: string;
  d: number;
  beta: number;
  steps: number;
  t_min: number;
  t_max: number;
}

export interface EnsembleOut {
  ensemble_id: string;
  k: number;
  D: number;
  runs: RunSummary[];
}

export interface SeriesOut {
  times: number[];
  values: number[];
}

export interface SeriesQuery {
  particle?: number;
  axis?: "x" | "y" | "z";
  from?: number | null;
  to?: number | null;
  max_points?: number;
}

export interface WindowOut {
  from: number | null;
  to: number | null;
}

export interface Settings {
  histogram_bins: number;
  recurrence_width: number;
  pca_threshold: number;
  pca_max_components: number;
  time_weighted: boolean;
  color_by: string;
}

export interface MeasureIn {
  name: string;
  kind: MeasureKind;
  source: string;
}

export interface MeasureOut {
  measure_id: string;
  name: string;
  kind: MeasureKind;
  source: string;
}

/** Parse or type failure reported by the measure compiler. */
export interface MeasurePosError {
  message: string;
  line: number;
  col: number;
}

export interface SelectionOut {
  run_ids: string[];
  origin: string;
}

export interface SessionOut {
  session_id: string;
  ensemble_id: string;
  window: WindowOut | null;
  measures: MeasureOut[];
  selection: SelectionOut;
  settings: Settings;
}

export interface EvaluateIn {
  measure: string;
  runs?: string[];
  from?: number | null;
  to?: number | null;
  step_measure?: string;
  max_points?: number;
}

export interface EvaluateRunOut {
  run: string;
  times: number[] | null;
  values: number[] | null;
  value: number | null;
  error: string | null;
}

export interface EvaluateOut {
  measure: string;
  kind: MeasureKind;
  results: EvaluateRunOut[];
}

export interface HeatmapCellOut {
  row: number;
  col: number;
  value: number;
  count: number;
  runs: string[];
}

export interface HeatmapSampleOut {
  run: string;
  d: number;
  beta: number;
}

export interface HeatmapOut {
  measure: string;
  d_boundaries: number[];
  beta_boundaries: number[];
  cells: HeatmapCellOut[];
  samples: HeatmapSampleOut[];
}

export interface PcaOut {
  run: string;
  intrinsic_dim: number;
  degenerate: boolean;
  explained_variance_ratio: number[];
  components: number[][];
  mean: number[];
  times: number[];
  projected: number[][];
}

export interface HistogramOut {
  bin_edges: number[];
  counts: number[];
}

export interface BuiltinOut {
  name: string;
  kinds: MeasureKind[];
  arity_min: number;
  arity_max: number;
  params: string[];
  result: string;
  doc: string;
}
