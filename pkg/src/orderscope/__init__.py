"""orderscope: interactive analysis of parameter-sweep orientation ensembles.

The package loads ensembles of simulation runs (per-run time axis plus a
3k-dimensional feature matrix of particle orientations), evaluates
user-defined measures written in a small expression language, and builds
the derived views: parameter-space heatmaps, per-run series, PCA
projections, and histograms. A FastAPI service and a batch CLI expose
the same engine.
"""

from .errors import (
    AnalysisError,
    DataValidationError,
    EmptyWindowError,
    MeasureError,
    MeasureRuntimeError,
    MeasureSyntaxError,
    MeasureTypeError,
    OrderscopeError,
)
from .ensemble import (
    Ensemble,
    ParameterPoint,
    Run,
    Window,
    component_series,
    expected_header,
    load_ensemble,
    load_ensemble_from_dict,
    slice_run,
)
from .analysis import (
    DEFAULT_EXCLUSION_WIDTH,
    DEFAULT_HISTOGRAM_BINS,
    Histogram,
    PcaResult,
    aggregate_mean,
    distance_to_first,
    histogram,
    pca,
    recurrence_series,
)
from .dsl import (
    CompiledMeasure,
    MeasureDefinition,
    MeasureKind,
    compile_measure,
    compile_source,
    eval_aggregate,
    eval_per_step,
    list_builtins,
    parse,
    to_source,
    typecheck,
)
from .heatmap import (
    CellDetail,
    GridLayout,
    HeatmapCell,
    HeatmapModel,
    HeatmapSample,
    RunFailure,
    Selection,
    SelectionOrigin,
    build_grid,
    build_heatmap,
    cell_detail,
    heatmap_to_csv,
    heatmap_to_json_dict,
    select_cell,
    select_region,
    select_runs,
)
from .generator import (
    EnsembleSpec,
    GeneratorMode,
    GeneratorSpec,
    default_mode_rule,
    generate_ensemble,
    generate_run,
    load_generator_spec,
    run_to_csv,
)

__version__ = "1.0.0"

__all__ = [
    "OrderscopeError",
    "DataValidationError",
    "EmptyWindowError",
    "AnalysisError",
    "MeasureError",
    "MeasureSyntaxError",
    "MeasureTypeError",
    "MeasureRuntimeError",
    "ParameterPoint",
    "Window",
    "Run",
    "Ensemble",
    "expected_header",
    "load_ensemble",
    "load_ensemble_from_dict",
    "slice_run",
    "component_series",
    "DEFAULT_EXCLUSION_WIDTH",
    "DEFAULT_HISTOGRAM_BINS",
    "recurrence_series",
    "distance_to_first",
    "PcaResult",
    "pca",
    "Histogram",
    "histogram",
    "aggregate_mean",
    "MeasureKind",
    "MeasureDefinition",
    "CompiledMeasure",
    "parse",
    "to_source",
    "typecheck",
    "compile_measure",
    "compile_source",
    "list_builtins",
    "eval_per_step",
    "eval_aggregate",
    "GridLayout",
    "HeatmapCell",
    "HeatmapSample",
    "HeatmapModel",
    "RunFailure",
    "Selection",
    "SelectionOrigin",
    "CellDetail",
    "build_grid",
    "build_heatmap",
    "select_region",
    "select_cell",
    "select_runs",
    "cell_detail",
    "heatmap_to_json_dict",
    "heatmap_to_csv",
    "GeneratorMode",
    "GeneratorSpec",
    "EnsembleSpec",
    "default_mode_rule",
    "generate_run",
    "generate_ensemble",
    "run_to_csv",
    "load_generator_spec",
    "__version__",
]
