"""Parameter-space heatmap model.

The ensemble's (d, beta) sample points induce an irregular grid: each
axis is partitioned at midpoints between neighboring unique values, and
the outer boundaries mirror the nearest interior gap, so every sample
sits strictly inside its own cell and the cells tile the bounding
rectangle exactly. Cell values come from evaluating a per-step measure
over the window and aggregating it to one scalar per run; runs sharing
a cell are averaged.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .analysis import DEFAULT_EXCLUSION_WIDTH, DEFAULT_HISTOGRAM_BINS, Histogram, histogram
from .dsl import CompiledMeasure, eval_aggregate, eval_per_step
from .ensemble import Ensemble, ParameterPoint, Window
from .errors import AnalysisError, EmptyWindowError, MeasureError


def _axis_boundaries(values: np.ndarray, single_half_width: float) -> np.ndarray:
    unique = np.unique(values)
    if unique.size == 1:
        u = unique[0]
        return np.array([u - single_half_width, u + single_half_width])
    inner = (unique[:-1] + unique[1:]) / 2.0
    low = unique[0] - (unique[1] - unique[0]) / 2.0
    high = unique[-1] + (unique[-1] - unique[-2]) / 2.0
    return np.concatenate([[low], inner, [high]])


@dataclass(frozen=True)
class GridLayout:
    """Cell geometry of the parameter plane: columns follow d, rows
    follow beta."""

    d_boundaries: np.ndarray
    beta_boundaries: np.ndarray
    d_values: np.ndarray
    beta_values: np.ndarray

    @property
    def n_cols(self) -> int:
        return len(self.d_boundaries) - 1

    @property
    def n_rows(self) -> int:
        return len(self.beta_boundaries) - 1

    def cell_of(self, point: ParameterPoint) -> tuple[int, int]:
        """Map a parameter point to its (row, col) cell."""
        col = int(np.searchsorted(self.d_boundaries, point.d, side="right")) - 1
        row = int(np.searchsorted(self.beta_boundaries, point.beta, side="right")) - 1
        if not (0 <= col < self.n_cols and 0 <= row < self.n_rows):
            raise AnalysisError(
                f"parameter point (d={point.d}, beta={point.beta}) lies outside the grid"
            )
        return row, col


def build_grid(
    samples: Sequence[ParameterPoint], single_half_width: float = 0.5
) -> GridLayout:
    """Build the irregular grid induced by the sample points.

    Per axis, with sorted unique values u1 < ... < um, interior
    boundaries sit at midpoints and the outer boundaries extend by half
    the nearest gap; an axis with a single value gets a band of
    ``single_half_width`` on both sides.
    """
    if not samples:
        raise AnalysisError("cannot build a grid from zero samples")
    d_values = np.array([p.d for p in samples], dtype=np.float64)
    beta_values = np.array([p.beta for p in samples], dtype=np.float64)
    if not (np.isfinite(d_values).all() and np.isfinite(beta_values).all()):
        raise AnalysisError("non-finite parameter values")
    return GridLayout(
        d_boundaries=_axis_boundaries(d_values, single_half_width),
        beta_boundaries=_axis_boundaries(beta_values, single_half_width),
        d_values=np.unique(d_values),
        beta_values=np.unique(beta_values),
    )


@dataclass(frozen=True)
class HeatmapCell:
    row: int
    col: int
    value: float
    run_ids: tuple[str, ...]
    sample_count: int


@dataclass
class HeatmapSample:
    """One run's dot on the heatmap; ``selected`` is the only mutable
    piece of the model and is owned by the selection operations."""

    run_id: str
    d: float
    beta: float
    selected: bool = False


@dataclass(frozen=True)
class RunFailure:
    run_id: str
    message: str


class SelectionOrigin(Enum):
    CELL_PICK = "cell_pick"
    REGION_RECT = "region_rect"
    SINGLE_POINT = "single_point"


@dataclass(frozen=True)
class Selection:
    run_ids: frozenset[str]
    origin: SelectionOrigin

    def sorted_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.run_ids))


@dataclass(frozen=True)
class HeatmapModel:
    """Aggregated measure values over the parameter grid.

    ``cells`` holds only non-empty cells; grid positions without a run
    are missing by construction. ``value_range`` spans the non-empty
    cell values, or is None when every run failed. ``step_values``
    retains each successful run's per-step series for cell detail
    histograms.
    """

    layout: GridLayout
    cells: Mapping[tuple[int, int], HeatmapCell]
    samples: tuple[HeatmapSample, ...]
    value_range: tuple[float, float] | None
    measure_name: str
    errors: tuple[RunFailure, ...] = ()
    step_values: Mapping[str, np.ndarray] = field(default_factory=dict, repr=False)

    def cell(self, row: int, col: int) -> HeatmapCell | None:
        return self.cells.get((row, col))


def build_heatmap(
    ensemble: Ensemble,
    step_measure: CompiledMeasure,
    agg_measure: CompiledMeasure,
    window: Window | None = None,
    *,
    default_width: int = DEFAULT_EXCLUSION_WIDTH,
    selection: Selection | None = None,
) -> HeatmapModel:
    """Evaluate step + aggregate measures per run and bin by parameter cell.

    Runs sharing a cell are averaged; ``sample_count`` records the
    multiplicity. Per-run failures (measure runtime errors, empty
    windows) are collected in ``errors`` and leave their cell missing
    rather than failing the whole heatmap.
    """
    runs = sorted(ensemble.runs, key=lambda r: r.id)
    layout = build_grid([r.params for r in runs])
    per_cell: dict[tuple[int, int], list[tuple[str, float]]] = {}
    failures: list[RunFailure] = []
    step_values: dict[str, np.ndarray] = {}
    selected_ids = selection.run_ids if selection is not None else frozenset()

    for run in runs:
        try:
            times, values = eval_per_step(
                step_measure, run, window, default_width=default_width
            )
            value = eval_aggregate(agg_measure, values, times)
        except (MeasureError, EmptyWindowError, AnalysisError) as exc:
            failures.append(RunFailure(run.id, str(exc)))
            continue
        step_values[run.id] = values
        per_cell.setdefault(layout.cell_of(run.params), []).append((run.id, value))

    cells: dict[tuple[int, int], HeatmapCell] = {}
    for (row, col), entries in per_cell.items():
        ids = tuple(run_id for run_id, _ in entries)
        mean_value = float(np.mean([v for _, v in entries]))
        cells[(row, col)] = HeatmapCell(row, col, mean_value, ids, len(entries))

    if cells:
        cell_values = [c.value for c in cells.values()]
        value_range = (min(cell_values), max(cell_values))
    else:
        value_range = None

    samples = tuple(
        HeatmapSample(r.id, r.params.d, r.params.beta, r.id in selected_ids)
        for r in runs
    )
    name = f"{agg_measure.name}({step_measure.name})"
    return HeatmapModel(
        layout=layout,
        cells=cells,
        samples=samples,
        value_range=value_range,
        measure_name=name,
        errors=tuple(failures),
        step_values=step_values,
    )


def select_region(
    model: HeatmapModel,
    d_range: tuple[float, float],
    beta_range: tuple[float, float],
) -> Selection:
    """Select every run whose parameter point lies in the closed
    rectangle, updating the model's sample flags."""
    d_lo, d_hi = min(d_range), max(d_range)
    b_lo, b_hi = min(beta_range), max(beta_range)
    if not all(np.isfinite([d_lo, d_hi, b_lo, b_hi])):
        raise AnalysisError("selection ranges must be finite")
    picked = set()
    for sample in model.samples:
        inside = d_lo <= sample.d <= d_hi and b_lo <= sample.beta <= b_hi
        sample.selected = inside
        if inside:
            picked.add(sample.run_id)
    return Selection(frozenset(picked), SelectionOrigin.REGION_RECT)


def select_cell(model: HeatmapModel, row: int, col: int) -> Selection:
    """Select the runs of one cell (empty cell selects nothing)."""
    cell = model.cell(row, col)
    picked = frozenset(cell.run_ids) if cell is not None else frozenset()
    for sample in model.samples:
        sample.selected = sample.run_id in picked
    return Selection(picked, SelectionOrigin.CELL_PICK)


def select_runs(model: HeatmapModel | None, run_ids: Iterable[str]) -> Selection:
    """Select explicit run ids (point picks in the UI)."""
    picked = frozenset(run_ids)
    if model is not None:
        for sample in model.samples:
            sample.selected = sample.run_id in picked
    return Selection(picked, SelectionOrigin.SINGLE_POINT)


@dataclass(frozen=True)
class CellDetail:
    value: float
    run_ids: tuple[str, ...]
    histogram: Histogram


def cell_detail(
    model: HeatmapModel, row: int, col: int, bins: int = DEFAULT_HISTOGRAM_BINS
) -> CellDetail:
    """Tooltip payload for one cell: exact value plus the distribution
    of the per-step measure values of all its runs."""
    cell = model.cell(row, col)
    if cell is None:
        raise AnalysisError(f"cell ({row}, {col}) is empty")
    concatenated = np.concatenate([model.step_values[run_id] for run_id in cell.run_ids])
    return CellDetail(cell.value, cell.run_ids, histogram(concatenated, bins))


def heatmap_to_json_dict(model: HeatmapModel) -> dict:
    """The export form: measure label, axis boundaries, one record per
    non-empty cell (canonical row/col order), and the sample dots."""
    cells = [
        {
            "row": cell.row,
            "col": cell.col,
            "value": cell.value,
            "count": cell.sample_count,
            "runs": list(cell.run_ids),
        }
        for cell in sorted(model.cells.values(), key=lambda c: (c.row, c.col))
    ]
    samples = [
        {"run": s.run_id, "d": s.d, "beta": s.beta} for s in model.samples
    ]
    return {
        "measure": model.measure_name,
        "d_boundaries": [float(b) for b in model.layout.d_boundaries],
        "beta_boundaries": [float(b) for b in model.layout.beta_boundaries],
        "cells": cells,
        "samples": samples,
    }


def heatmap_to_csv(model: HeatmapModel) -> str:
    """CSV export alternative: one row per non-empty cell."""
    out = io.StringIO()
    out.write("row,col,d_low,d_high,beta_low,beta_high,value,count,runs\n")
    d_bounds = [float(b) for b in model.layout.d_boundaries]
    b_bounds = [float(b) for b in model.layout.beta_boundaries]
    for cell in sorted(model.cells.values(), key=lambda c: (c.row, c.col)):
        runs = ";".join(cell.run_ids)
        out.write(
            f"{cell.row},{cell.col},"
            f"{d_bounds[cell.col]!r},{d_bounds[cell.col + 1]!r},"
            f"{b_bounds[cell.row]!r},{b_bounds[cell.row + 1]!r},"
            f"{cell.value!r},{cell.sample_count},{runs}\n"
        )
    return out.getvalue()
