"""Request and response models of the HTTP API.

Window bounds travel as "from"/"to" on the wire (Python-keyword safe
aliases on the models). NaN and infinity never appear in responses; the
engine raises instead of producing them.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class RunSummary(BaseModel):
    id: str
    d: float
    beta: float
    steps: int
    t_min: float
    t_max: float


class EnsembleIn(BaseModel):
    """Load request: a manifest path (or its directory) under the data
    root, or the manifest content inline with file paths relative to
    the data root."""

    path: str | None = None
    manifest: dict | None = None


class EnsembleOut(BaseModel):
    ensemble_id: str
    k: int
    D: int
    runs: list[RunSummary]


class SeriesOut(BaseModel):
    times: list[float]
    values: list[float]


class SettingsModel(BaseModel):
    histogram_bins: int = 20
    recurrence_width: int = 10
    pca_threshold: float = 0.999
    pca_max_components: int = 8
    time_weighted: bool = False
    color_by: str = "d"


class SettingsPatch(BaseModel):
    histogram_bins: int | None = None
    recurrence_width: int | None = None
    pca_threshold: float | None = None
    pca_max_components: int | None = None
    time_weighted: bool | None = None
    color_by: str | None = None


class WindowModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    t_start: float | None = Field(default=None, alias="from")
    t_end: float | None = Field(default=None, alias="to")


class SessionIn(BaseModel):
    ensemble_id: str
    settings: SettingsPatch | None = None


class MeasureIn(BaseModel):
    name: str
    kind: str
    source: str


class MeasureOut(BaseModel):
    measure_id: str
    name: str
    kind: str
    source: str


class SelectionIn(BaseModel):
    """Either a parameter rectangle or an explicit run id list."""

    d_range: tuple[float, float] | None = None
    beta_range: tuple[float, float] | None = None
    run_ids: list[str] | None = None


class SelectionOut(BaseModel):
    run_ids: list[str]
    origin: str


class SessionOut(BaseModel):
    session_id: str
    ensemble_id: str
    window: WindowModel | None
    measures: list[MeasureOut]
    selection: SelectionOut
    settings: SettingsModel


class EvaluateIn(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    measure: str
    runs: list[str] | None = None
    t_start: float | None = Field(default=None, alias="from")
    t_end: float | None = Field(default=None, alias="to")
    step_measure: str | None = None
    max_points: int | None = None


class EvaluateRunOut(BaseModel):
    run: str
    times: list[float] | None = None
    values: list[float] | None = None
    value: float | None = None
    error: str | None = None


class EvaluateOut(BaseModel):
    measure: str
    kind: str
    results: list[EvaluateRunOut]


class HeatmapCellOut(BaseModel):
    row: int
    col: int
    value: float
    count: int
    runs: list[str]


class HeatmapSampleOut(BaseModel):
    run: str
    d: float
    beta: float


class HeatmapOut(BaseModel):
    measure: str
    d_boundaries: list[float]
    beta_boundaries: list[float]
    cells: list[HeatmapCellOut]
    samples: list[HeatmapSampleOut]


class PcaOut(BaseModel):
    run: str
    intrinsic_dim: int
    degenerate: bool
    explained_variance_ratio: list[float]
    components: list[list[float]]
    mean: list[float]
    times: list[float]
    projected: list[list[float]]


class HistogramOut(BaseModel):
    bin_edges: list[float]
    counts: list[int]


class BuiltinOut(BaseModel):
    name: str
    kinds: list[str]
    arity_min: int
    arity_max: int
    params: list[str]
    result: str
    doc: str


class SessionExport(BaseModel):
    """Portable session state: measures are the durable artifact."""

    measures: list[MeasureIn]
    window: WindowModel | None = None
    selection: SelectionIn | None = None
    settings: SettingsModel | None = None


class HealthOut(BaseModel):
    status: str
    version: str
