"""FastAPI application factory.

All numerics happen in the core engine; this layer owns HTTP shapes,
session state, and error mapping:

* 404 -- unknown ensemble/session/run/measure ids, missing paths
* 400 -- data validation failures, bad query parameters, empty windows
* 422 -- measure source errors (parse/type, with line and column)

Per-run failures inside batch evaluation are reported per run and never
fail the whole request.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.middleware.cors import CORSMiddleware

from .. import __version__
from ..analysis import pca as run_pca
from ..analysis import histogram as make_histogram
from ..dsl import (
    MeasureDefinition,
    MeasureKind,
    compile_measure,
    eval_aggregate,
    eval_per_step,
    list_builtins,
)
from ..ensemble import (
    Ensemble,
    Run,
    Window,
    component_series,
    load_ensemble,
    load_ensemble_from_dict,
    slice_run,
)
from ..errors import (
    AnalysisError,
    DataValidationError,
    EmptyWindowError,
    MeasureError,
    MeasureRuntimeError,
    MeasureSyntaxError,
    MeasureTypeError,
)
from ..heatmap import Selection, SelectionOrigin, build_heatmap, heatmap_to_json_dict
from . import schemas
from .decimation import decimate_minmax
from .sessions import SessionSnapshot, SessionState, Settings, Store


def _not_found(what: str, key: str) -> HTTPException:
    return HTTPException(
        status_code=404,
        detail={"code": "not_found", "message": f"unknown {what} {key!r}"},
    )


def _bad_request(message: str, **extra) -> HTTPException:
    return HTTPException(
        status_code=400, detail={"code": "bad_request", "message": message, **extra}
    )


def _window_from(t_start: float | None, t_end: float | None,
                 fallback: tuple | None) -> Window | None:
    if t_start is None and t_end is None:
        if fallback is None:
            return None
        t_start, t_end = fallback
    lo = -np.inf if t_start is None else float(t_start)
    hi = np.inf if t_end is None else float(t_end)
    return Window(lo, hi)


def _check_settings_patch(changes: dict) -> None:
    bins = changes.get("histogram_bins")
    if bins is not None and bins < 1:
        raise _bad_request(f"histogram_bins must be positive, got {bins}")
    width = changes.get("recurrence_width")
    if width is not None and width < 1:
        raise _bad_request(f"recurrence_width must be positive, got {width}")
    threshold = changes.get("pca_threshold")
    if threshold is not None and not 0.0 < threshold <= 1.0:
        raise _bad_request(f"pca_threshold must be in (0, 1], got {threshold}")
    cap = changes.get("pca_max_components")
    if cap is not None and cap < 1:
        raise _bad_request(f"pca_max_components must be positive, got {cap}")
    color_by = changes.get("color_by")
    if color_by is not None and color_by not in ("d", "beta"):
        raise _bad_request(f"color_by must be 'd' or 'beta', got {color_by!r}")


def _measure_out(measure) -> schemas.MeasureOut:
    return schemas.MeasureOut(
        measure_id=measure.name,
        name=measure.name,
        kind=measure.kind.value,
        source=measure.definition.source,
    )


def _selection_out(selection: Selection) -> schemas.SelectionOut:
    return schemas.SelectionOut(
        run_ids=list(selection.sorted_ids()), origin=selection.origin.value
    )


def _settings_out(settings: Settings) -> schemas.SettingsModel:
    return schemas.SettingsModel(
        histogram_bins=settings.histogram_bins,
        recurrence_width=settings.recurrence_width,
        pca_threshold=settings.pca_threshold,
        pca_max_components=settings.pca_max_components,
        time_weighted=settings.time_weighted,
        color_by=settings.color_by,
    )


def _session_out(session: SessionState) -> schemas.SessionOut:
    snap = session.snapshot()
    window = None
    if snap.window is not None:
        window = schemas.WindowModel(t_start=snap.window[0], t_end=snap.window[1])
    measures = [_measure_out(m) for _, m in sorted(snap.measures.items())]
    return schemas.SessionOut(
        session_id=snap.session_id,
        ensemble_id=snap.ensemble_id,
        window=window,
        measures=measures,
        selection=_selection_out(snap.selection),
        settings=_settings_out(snap.settings),
    )


def _ensemble_out(ensemble_id: str, ensemble: Ensemble) -> schemas.EnsembleOut:
    runs = [
        schemas.RunSummary(
            id=r.id, d=r.params.d, beta=r.params.beta,
            steps=r.steps, t_min=r.t_min, t_max=r.t_max,
        )
        for r in sorted(ensemble.runs, key=lambda r: r.id)
    ]
    return schemas.EnsembleOut(
        ensemble_id=ensemble_id, k=ensemble.k, D=ensemble.dim, runs=runs
    )


def create_app(data_root: str | Path | None = None) -> FastAPI:
    """Build the service; `data_root`, when given, confines every
    client-supplied ensemble path."""
    app = FastAPI(title="orderscope", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = Store(data_root=Path(data_root) if data_root is not None else None)
    app.state.store = store

    @app.exception_handler(DataValidationError)
    async def _validation_handler(request, exc: DataValidationError):
        detail = {"code": "validation", "message": exc.message}
        if exc.run_id is not None:
            detail["run"] = exc.run_id
        if exc.row is not None:
            detail["row"] = exc.row
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(EmptyWindowError)
    async def _window_handler(request, exc: EmptyWindowError):
        return JSONResponse(
            status_code=400,
            content={"detail": {"code": "empty_window", "message": str(exc)}},
        )

    @app.exception_handler(MeasureSyntaxError)
    @app.exception_handler(MeasureTypeError)
    async def _measure_source_handler(request, exc):
        detail = {
            "code": "measure_error",
            "message": exc.message,
            "line": exc.line,
            "col": exc.col,
        }
        return JSONResponse(status_code=422, content={"detail": detail})

    @app.exception_handler(MeasureRuntimeError)
    async def _measure_runtime_handler(request, exc: MeasureRuntimeError):
        detail = {"code": "measure_runtime", "message": exc.message}
        if exc.time_index is not None:
            detail["time_index"] = exc.time_index
        return JSONResponse(status_code=422, content={"detail": detail})

    @app.exception_handler(MeasureError)
    async def _measure_handler(request, exc: MeasureError):
        return JSONResponse(
            status_code=422,
            content={"detail": {"code": "measure_error", "message": str(exc)}},
        )

    @app.exception_handler(AnalysisError)
    async def _analysis_handler(request, exc: AnalysisError):
        return JSONResponse(
            status_code=400,
            content={"detail": {"code": "analysis", "message": str(exc)}},
        )

    def get_session(session_id: str) -> SessionState:
        session = store.get_session(session_id)
        if session is None:
            raise _not_found("session", session_id)
        return session

    def get_run(ensemble: Ensemble, run_id: str) -> Run:
        run = ensemble.by_id.get(run_id)
        if run is None:
            raise _not_found("run", run_id)
        return run

    def get_measure(snap: SessionSnapshot, name: str):
        measure = snap.measures.get(name)
        if measure is None:
            raise _not_found("measure", name)
        return measure

    @app.get("/health", response_model=schemas.HealthOut)
    def health():
        return schemas.HealthOut(status="ok", version=__version__)

    @app.get("/builtins", response_model=list[schemas.BuiltinOut])
    def builtins():
        return [
            schemas.BuiltinOut(
                name=b.name,
                kinds=[k.value for k in b.kinds],
                arity_min=b.min_arity,
                arity_max=b.max_arity,
                params=[p.value for p in b.params],
                result=b.result.value,
                doc=b.doc,
            )
            for b in list_builtins()
        ]

    @app.post("/ensembles", response_model=schemas.EnsembleOut)
    def post_ensemble(body: schemas.EnsembleIn):
        if (body.path is None) == (body.manifest is None):
            raise _bad_request("provide exactly one of 'path' or 'manifest'")
        if body.path is not None:
            path = store.resolve_path(body.path)
            manifest_path = path / "manifest.json" if path.is_dir() else path
            if not manifest_path.exists():
                raise _not_found("path", body.path)
            ensemble = load_ensemble(manifest_path)
        else:
            base = store.data_root if store.data_root is not None else Path.cwd()
            ensemble = load_ensemble_from_dict(body.manifest, base_dir=base)
        ensemble_id = store.add_ensemble(ensemble)
        return _ensemble_out(ensemble_id, ensemble)

    @app.get("/ensembles/{ensemble_id}", response_model=schemas.EnsembleOut)
    def get_ensemble(ensemble_id: str):
        ensemble = store.get_ensemble(ensemble_id)
        if ensemble is None:
            raise _not_found("ensemble", ensemble_id)
        return _ensemble_out(ensemble_id, ensemble)

    @app.get(
        "/ensembles/{ensemble_id}/runs/{run_id}/series",
        response_model=schemas.SeriesOut,
    )
    def get_series(
        ensemble_id: str,
        run_id: str,
        particle: int = 0,
        axis: str = "x",
        t_start: float | None = Query(default=None, alias="from"),
        t_end: float | None = Query(default=None, alias="to"),
        max_points: int | None = None,
    ):
        ensemble = store.get_ensemble(ensemble_id)
        if ensemble is None:
            raise _not_found("ensemble", ensemble_id)
        run = get_run(ensemble, run_id)
        window = _window_from(t_start, t_end, None)
        if window is not None:
            run = slice_run(run, window)
        try:
            times, values = component_series(run, particle, axis)
        except (ValueError, IndexError) as exc:
            raise _bad_request(str(exc))
        if max_points is not None:
            times, values = decimate_minmax(times, values, max_points)
        return schemas.SeriesOut(times=times.tolist(), values=values.tolist())

    @app.post("/sessions", response_model=schemas.SessionOut)
    def post_session(body: schemas.SessionIn):
        settings = Settings()
        if body.settings is not None:
            changes = {
                k: v for k, v in body.settings.model_dump().items() if v is not None
            }
            _check_settings_patch(changes)
            settings = Settings(**{**settings.__dict__, **changes})
        try:
            session = store.create_session(body.ensemble_id, settings)
        except KeyError:
            raise _not_found("ensemble", body.ensemble_id)
        return _session_out(session)

    @app.get("/sessions/{session_id}", response_model=schemas.SessionOut)
    def get_session_state(session_id: str):
        return _session_out(get_session(session_id))

    @app.post("/sessions/{session_id}/measures", response_model=schemas.MeasureOut)
    def post_measure(session_id: str, body: schemas.MeasureIn):
        session = get_session(session_id)
        try:
            kind = MeasureKind(body.kind)
        except ValueError:
            raise _bad_request(
                f"unknown measure kind {body.kind!r}, expected 'per_step' or 'aggregate'"
            )
        measure = compile_measure(MeasureDefinition(body.name, kind, body.source))
        session.put_measure(measure)
        return _measure_out(measure)

    @app.get(
        "/sessions/{session_id}/measures", response_model=list[schemas.MeasureOut]
    )
    def get_measures(session_id: str):
        snap = get_session(session_id).snapshot()
        return [_measure_out(m) for _, m in sorted(snap.measures.items())]

    @app.post("/sessions/{session_id}/evaluate", response_model=schemas.EvaluateOut)
    def evaluate(session_id: str, body: schemas.EvaluateIn):
        snap = get_session(session_id).snapshot()
        measure = get_measure(snap, body.measure)
        window = _window_from(body.t_start, body.t_end, snap.window)
        ensemble = snap.ensemble

        if body.runs is None:
            runs = sorted(ensemble.runs, key=lambda r: r.id)
        else:
            runs = [get_run(ensemble, run_id) for run_id in body.runs]

        step_measure = None
        if measure.kind is MeasureKind.AGGREGATE:
            if body.step_measure is None:
                raise _bad_request(
                    "aggregate evaluation needs 'step_measure' naming the "
                    "per-step measure that produces the series"
                )
            step_measure = get_measure(snap, body.step_measure)
            if step_measure.kind is not MeasureKind.PER_STEP:
                raise _bad_request(
                    f"'{body.step_measure}' is not a per-step measure"
                )

        width = snap.settings.recurrence_width
        results = []
        for run in runs:
            try:
                if measure.kind is MeasureKind.PER_STEP:
                    times, values = eval_per_step(
                        measure, run, window, default_width=width
                    )
                    if body.max_points is not None:
                        times, values = decimate_minmax(times, values, body.max_points)
                    results.append(
                        schemas.EvaluateRunOut(
                            run=run.id, times=times.tolist(), values=values.tolist()
                        )
                    )
                else:
                    times, values = eval_per_step(
                        step_measure, run, window, default_width=width
                    )
                    value = eval_aggregate(measure, values, times)
                    results.append(schemas.EvaluateRunOut(run=run.id, value=value))
            except (MeasureError, EmptyWindowError, AnalysisError) as exc:
                results.append(schemas.EvaluateRunOut(run=run.id, error=str(exc)))
        return schemas.EvaluateOut(
            measure=measure.name, kind=measure.kind.value, results=results
        )

    @app.get("/sessions/{session_id}/heatmap", response_model=schemas.HeatmapOut)
    def heatmap(
        session_id: str,
        step_measure: str,
        agg_measure: str,
        t_start: float | None = Query(default=None, alias="from"),
        t_end: float | None = Query(default=None, alias="to"),
    ):
        snap = get_session(session_id).snapshot()
        step = get_measure(snap, step_measure)
        agg = get_measure(snap, agg_measure)
        if step.kind is not MeasureKind.PER_STEP:
            raise _bad_request(f"'{step_measure}' is not a per-step measure")
        if agg.kind is not MeasureKind.AGGREGATE:
            raise _bad_request(f"'{agg_measure}' is not an aggregate measure")
        window = _window_from(t_start, t_end, snap.window)
        model = build_heatmap(
            snap.ensemble, step, agg, window,
            default_width=snap.settings.recurrence_width,
            selection=snap.selection,
        )
        return heatmap_to_json_dict(model)

    @app.get(
        "/sessions/{session_id}/runs/{run_id}/pca", response_model=schemas.PcaOut
    )
    def pca_endpoint(
        session_id: str,
        run_id: str,
        threshold: float | None = None,
        max: int | None = None,
        t_start: float | None = Query(default=None, alias="from"),
        t_end: float | None = Query(default=None, alias="to"),
    ):
        snap = get_session(session_id).snapshot()
        run = get_run(snap.ensemble, run_id)
        var_threshold = (
            threshold if threshold is not None else snap.settings.pca_threshold
        )
        if not 0.0 < var_threshold <= 1.0:
            raise _bad_request(f"threshold must be in (0, 1], got {var_threshold}")
        cap = max if max is not None else snap.settings.pca_max_components
        if cap < 1:
            raise _bad_request(f"max must be positive, got {cap}")
        window = _window_from(t_start, t_end, snap.window)
        if window is not None:
            run = slice_run(run, window)
        result = run_pca(run.features, var_threshold=var_threshold, max_components=cap)
        n_proj = result.projected.shape[1]
        return schemas.PcaOut(
            run=run.id,
            intrinsic_dim=result.intrinsic_dim,
            degenerate=result.degenerate,
            explained_variance_ratio=result.explained_variance_ratio.tolist(),
            components=result.components[:n_proj].tolist(),
            mean=result.mean.tolist(),
            times=run.times.tolist(),
            projected=result.projected.tolist(),
        )

    @app.get(
        "/sessions/{session_id}/runs/{run_id}/histogram",
        response_model=schemas.HistogramOut,
    )
    def histogram_endpoint(
        session_id: str,
        run_id: str,
        measure: str,
        bins: int | None = None,
        t_start: float | None = Query(default=None, alias="from"),
        t_end: float | None = Query(default=None, alias="to"),
    ):
        snap = get_session(session_id).snapshot()
        run = get_run(snap.ensemble, run_id)
        step = get_measure(snap, measure)
        if step.kind is not MeasureKind.PER_STEP:
            raise _bad_request(f"'{measure}' is not a per-step measure")
        n_bins = bins if bins is not None else snap.settings.histogram_bins
        if n_bins < 1:
            raise _bad_request(f"bins must be positive, got {n_bins}")
        window = _window_from(t_start, t_end, snap.window)
        _, values = eval_per_step(
            step, run, window, default_width=snap.settings.recurrence_width
        )
        hist = make_histogram(values, n_bins)
        return schemas.HistogramOut(
            bin_edges=hist.bin_edges.tolist(),
            counts=hist.counts.tolist(),
        )

    @app.put("/sessions/{session_id}/selection", response_model=schemas.SelectionOut)
    def put_selection(session_id: str, body: schemas.SelectionIn):
        session = get_session(session_id)
        ensemble = session.ensemble
        if body.run_ids is not None:
            for run_id in body.run_ids:
                get_run(ensemble, run_id)
            selection = Selection(
                frozenset(body.run_ids), SelectionOrigin.SINGLE_POINT
            )
        elif body.d_range is not None and body.beta_range is not None:
            d_lo, d_hi = sorted(body.d_range)
            b_lo, b_hi = sorted(body.beta_range)
            if not all(np.isfinite([d_lo, d_hi, b_lo, b_hi])):
                raise _bad_request("selection ranges must be finite")
            picked = frozenset(
                r.id
                for r in ensemble.runs
                if d_lo <= r.params.d <= d_hi and b_lo <= r.params.beta <= b_hi
            )
            selection = Selection(picked, SelectionOrigin.REGION_RECT)
        else:
            raise _bad_request(
                "provide either 'run_ids' or both 'd_range' and 'beta_range'"
            )
        session.set_selection(selection)
        return _selection_out(selection)

    @app.put("/sessions/{session_id}/window", response_model=schemas.SessionOut)
    def put_window(session_id: str, body: schemas.WindowModel):
        session = get_session(session_id)
        if body.t_start is None and body.t_end is None:
            session.set_window(None)
        else:
            if (
                body.t_start is not None
                and body.t_end is not None
                and body.t_start > body.t_end
            ):
                raise _bad_request(
                    f"window start {body.t_start} exceeds end {body.t_end}"
                )
            session.set_window((body.t_start, body.t_end))
        return _session_out(session)

    @app.put("/sessions/{session_id}/settings", response_model=schemas.SessionOut)
    def put_settings(session_id: str, body: schemas.SettingsPatch):
        session = get_session(session_id)
        changes = body.model_dump()
        _check_settings_patch(changes)
        session.update_settings(**changes)
        return _session_out(session)

    @app.get("/sessions/{session_id}/export", response_model=schemas.SessionExport)
    def export_session(session_id: str):
        snap = get_session(session_id).snapshot()
        window = None
        if snap.window is not None:
            window = schemas.WindowModel(t_start=snap.window[0], t_end=snap.window[1])
        return schemas.SessionExport(
            measures=[
                schemas.MeasureIn(
                    name=m.name, kind=m.kind.value, source=m.definition.source
                )
                for _, m in sorted(snap.measures.items())
            ],
            window=window,
            selection=schemas.SelectionIn(run_ids=list(snap.selection.sorted_ids())),
            settings=_settings_out(snap.settings),
        )

    @app.post("/sessions/{session_id}/import", response_model=schemas.SessionOut)
    def import_session(session_id: str, body: schemas.SessionExport):
        session = get_session(session_id)
        for m in body.measures:
            try:
                kind = MeasureKind(m.kind)
            except ValueError:
                raise _bad_request(f"unknown measure kind {m.kind!r}")
            session.put_measure(
                compile_measure(MeasureDefinition(m.name, kind, m.source))
            )
        if body.window is not None:
            if body.window.t_start is None and body.window.t_end is None:
                session.set_window(None)
            else:
                session.set_window((body.window.t_start, body.window.t_end))
        if body.selection is not None and body.selection.run_ids is not None:
            for run_id in body.selection.run_ids:
                get_run(session.ensemble, run_id)
            session.set_selection(
                Selection(
                    frozenset(body.selection.run_ids), SelectionOrigin.SINGLE_POINT
                )
            )
        if body.settings is not None:
            changes = body.settings.model_dump()
            _check_settings_patch(changes)
            session.update_settings(**changes)
        return _session_out(session)

    return app
