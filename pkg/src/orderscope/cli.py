"""Batch command line: generate, validate, evaluate, export, serve.

Every export is byte-stable for fixed inputs: runs are processed in
run-id order, floats are written with shortest exact decimals, and JSON
layouts are fixed. Exit codes: 0 ok, 1 data/validation error, 2 measure
error, 3 I/O error. Every flag can also be set through environment
variables prefixed ORDERSCOPE_ (e.g. ORDERSCOPE_EVAL_WIDTH).
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import pca as compute_pca
from .dsl import (
    CompiledMeasure,
    MeasureKind,
    compile_source,
    eval_aggregate,
    eval_per_step,
)
from .ensemble import Ensemble, Window, load_ensemble, slice_run
from .errors import (
    AnalysisError,
    DataValidationError,
    EmptyWindowError,
    MeasureError,
)
from .generator import generate_ensemble, load_generator_spec
from .heatmap import build_heatmap, heatmap_to_csv, heatmap_to_json_dict

EXIT_DATA = 1
EXIT_MEASURE = 2
EXIT_IO = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    """Map engine errors to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MeasureError as exc:
            _fail(EXIT_MEASURE, str(exc))
        except (DataValidationError, EmptyWindowError, AnalysisError) as exc:
            _fail(EXIT_DATA, str(exc))
        except OSError as exc:
            _fail(EXIT_IO, str(exc))

    return wrapper


def read_measure_file(path: str, kind: MeasureKind) -> CompiledMeasure:
    """Compile a measure file: one expression, '#' comment lines, and an
    optional '# name: ...' header naming the measure."""
    file_path = Path(path)
    text = file_path.read_text(encoding="utf-8")
    name = file_path.stem
    kept: list[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            comment = stripped[1:].strip()
            if comment.lower().startswith("name:"):
                name = comment[5:].strip()
            # comment lines are blanked, not removed, so error positions
            # still point into the file as written
            kept.append("")
            continue
        kept.append(line)
    source = "\n".join(kept)
    if not source.strip():
        raise MeasureError(f"measure file {path} contains no expression")
    return compile_source(name, kind, source)


def _window_option(t_start: float | None, t_end: float | None) -> Window | None:
    if t_start is None and t_end is None:
        return None
    lo = -np.inf if t_start is None else t_start
    hi = np.inf if t_end is None else t_end
    return Window(lo, hi)


def _load(ensemble_path: str) -> Ensemble:
    return load_ensemble(ensemble_path)


def _window_dict(t_start: float | None, t_end: float | None) -> dict:
    return {"from": t_start, "to": t_end}


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


@click.group(context_settings={"auto_envvar_prefix": "ORDERSCOPE"})
@click.version_option(version=__version__, prog_name="orderscope")
def cli():
    """Analysis of parameter-sweep orientation ensembles."""


@cli.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="JSON recipe: d_values, beta_values, and generator options.")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory for manifest.json and run CSVs.")
@guarded
def gen(spec_path: str, out_dir: str):
    """Generate a synthetic ensemble with known ground truth."""
    spec = load_generator_spec(spec_path)
    manifest = generate_ensemble(spec, out_dir)
    n_runs = len(spec.d_values) * len(spec.beta_values)
    click.echo(f"wrote {n_runs} runs to {manifest.parent} (manifest: {manifest})")


@cli.command()
@click.option("--ensemble", "ensemble_path", required=True, type=click.Path(),
              help="Ensemble directory or manifest path.")
@guarded
def validate(ensemble_path: str):
    """Validate an on-disk ensemble; exit 0 only when clean."""
    ensemble = _load(ensemble_path)
    steps = [r.steps for r in ensemble.runs]
    click.echo(
        f"ok: {len(ensemble.runs)} runs, k={ensemble.k} (D={ensemble.dim}), "
        f"steps {min(steps)}..{max(steps)}"
    )


@cli.command("eval")
@click.option("--ensemble", "ensemble_path", required=True, type=click.Path())
@click.option("--step-measure", "step_file", required=True, type=click.Path(exists=True),
              help="Per-step measure file.")
@click.option("--agg-measure", "agg_file", type=click.Path(exists=True),
              help="Aggregate measure file (required unless --per-step).")
@click.option("--from", "t_start", type=float, default=None,
              help="Window start time (inclusive).")
@click.option("--to", "t_end", type=float, default=None,
              help="Window end time (inclusive).")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output file (.json or .csv); a directory with --per-step.")
@click.option("--per-step", is_flag=True, default=False,
              help="Emit one per-run series CSV instead of aggregated scalars.")
@click.option("--width", type=int, default=10, show_default=True,
              help="Default exclusion width for recurrence().")
@guarded
def eval_cmd(ensemble_path: str, step_file: str, agg_file: str | None,
             t_start: float | None, t_end: float | None, out_path: str,
             per_step: bool, width: int):
    """Evaluate measures over every run; write scalars or series."""
    ensemble = _load(ensemble_path)
    step_measure = read_measure_file(step_file, MeasureKind.PER_STEP)
    window = _window_option(t_start, t_end)
    runs = sorted(ensemble.runs, key=lambda r: r.id)

    if per_step:
        out_dir = Path(out_path)
        out_dir.mkdir(parents=True, exist_ok=True)
        failures = []
        for run in runs:
            try:
                times, values = eval_per_step(
                    step_measure, run, window, default_width=width
                )
            except (MeasureError, EmptyWindowError, AnalysisError) as exc:
                failures.append((run.id, str(exc)))
                continue
            lines = ["t,value"]
            lines.extend(
                f"{repr(float(t))},{repr(float(v))}" for t, v in zip(times, values)
            )
            _write_text(out_dir / f"{run.id}.csv", "\n".join(lines) + "\n")
        for run_id, message in failures:
            click.echo(f"warning: run {run_id}: {message}", err=True)
        click.echo(f"wrote {len(runs) - len(failures)} series files to {out_dir}")
        if len(failures) == len(runs):
            _fail(EXIT_MEASURE, "every run failed")
        return

    if agg_file is None:
        _fail(EXIT_MEASURE, "--agg-measure is required unless --per-step is set")
    agg_measure = read_measure_file(agg_file, MeasureKind.AGGREGATE)

    rows = []
    failures = 0
    for run in runs:
        entry = {"id": run.id, "d": run.params.d, "beta": run.params.beta}
        try:
            times, values = eval_per_step(
                step_measure, run, window, default_width=width
            )
            entry["value"] = eval_aggregate(agg_measure, values, times)
        except (MeasureError, EmptyWindowError, AnalysisError) as exc:
            entry["value"] = None
            entry["error"] = str(exc)
            failures += 1
            click.echo(f"warning: run {run.id}: {exc}", err=True)
        rows.append(entry)

    out = Path(out_path)
    if out.suffix == ".csv":
        lines = ["id,d,beta,value"]
        for row in rows:
            value = "" if row["value"] is None else repr(float(row["value"]))
            lines.append(f"{row['id']},{row['d']!r},{row['beta']!r},{value}")
        _write_text(out, "\n".join(lines) + "\n")
    else:
        payload = {
            "step_measure": step_measure.name,
            "agg_measure": agg_measure.name,
            "window": _window_dict(t_start, t_end),
            "runs": rows,
        }
        _write_text(out, json.dumps(payload, indent=2) + "\n")
    click.echo(f"wrote {len(rows)} run values to {out}")
    if failures == len(rows):
        _fail(EXIT_MEASURE, "every run failed")


@cli.command()
@click.option("--ensemble", "ensemble_path", required=True, type=click.Path())
@click.option("--step-measure", "step_file", required=True, type=click.Path(exists=True))
@click.option("--agg-measure", "agg_file", required=True, type=click.Path(exists=True))
@click.option("--from", "t_start", type=float, default=None)
@click.option("--to", "t_end", type=float, default=None)
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output file (.json or .csv).")
@click.option("--width", type=int, default=10, show_default=True)
@guarded
def heatmap(ensemble_path: str, step_file: str, agg_file: str,
            t_start: float | None, t_end: float | None, out_path: str,
            width: int):
    """Export the parameter-space heatmap of an aggregated measure."""
    ensemble = _load(ensemble_path)
    step_measure = read_measure_file(step_file, MeasureKind.PER_STEP)
    agg_measure = read_measure_file(agg_file, MeasureKind.AGGREGATE)
    window = _window_option(t_start, t_end)
    model = build_heatmap(
        ensemble, step_measure, agg_measure, window, default_width=width
    )
    for failure in model.errors:
        click.echo(f"warning: run {failure.run_id}: {failure.message}", err=True)
    if not model.cells:
        _fail(EXIT_MEASURE, "every run failed; no heatmap cells")
    out = Path(out_path)
    if out.suffix == ".csv":
        _write_text(out, heatmap_to_csv(model))
    else:
        _write_text(out, json.dumps(heatmap_to_json_dict(model), indent=2) + "\n")
    click.echo(f"wrote heatmap ({len(model.cells)} cells) to {out}")


@cli.command()
@click.option("--ensemble", "ensemble_path", required=True, type=click.Path())
@click.option("--run", "run_id", required=True, help="Run id within the ensemble.")
@click.option("--threshold", type=float, default=0.999, show_default=True,
              help="Explained-variance threshold in (0, 1].")
@click.option("--max", "max_components", type=int, default=8, show_default=True,
              help="Cap on projected components.")
@click.option("--from", "t_start", type=float, default=None)
@click.option("--to", "t_end", type=float, default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@guarded
def pca(ensemble_path: str, run_id: str, threshold: float, max_components: int,
        t_start: float | None, t_end: float | None, out_path: str):
    """Export the PCA of one run's windowed trajectory."""
    ensemble = _load(ensemble_path)
    try:
        run = ensemble.run(run_id)
    except KeyError as exc:
        _fail(EXIT_DATA, str(exc))
    window = _window_option(t_start, t_end)
    if window is not None:
        run = slice_run(run, window)
    result = compute_pca(run.features, var_threshold=threshold,
                         max_components=max_components)
    n_proj = result.projected.shape[1]
    payload = {
        "run": run.id,
        "window": _window_dict(t_start, t_end),
        "intrinsic_dim": result.intrinsic_dim,
        "degenerate": result.degenerate,
        "explained_variance_ratio": result.explained_variance_ratio.tolist(),
        "components": result.components[:n_proj].tolist(),
        "mean": result.mean.tolist(),
        "times": run.times.tolist(),
        "projected": result.projected.tolist(),
    }
    _write_text(Path(out_path), json.dumps(payload, indent=2) + "\n")
    click.echo(
        f"wrote PCA of run {run_id} (intrinsic_dim={result.intrinsic_dim}, "
        f"{n_proj} projected components) to {out_path}"
    )


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8137, show_default=True)
@click.option("--data-root", type=click.Path(exists=True, file_okay=False),
              default=None, help="Confine ensemble paths to this directory.")
@guarded
def serve(host: str, port: int, data_root: str | None):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_root=data_root)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main():
    cli(prog_name="orderscope")


if __name__ == "__main__":
    main()
