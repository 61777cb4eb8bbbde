from __future__ import annotations

import json

import numpy as np
import pytest

from orderscope import (
    AnalysisError,
    DataValidationError,
    Ensemble,
    ParameterPoint,
    SelectionOrigin,
    Window,
    build_grid,
    build_heatmap,
    cell_detail,
    compile_source,
    heatmap_to_csv,
    heatmap_to_json_dict,
    select_cell,
    select_region,
    select_runs,
)

from conftest import deterministic_features, make_run

STEP_D = compile_source("level", "per_step", "d")
STEP_X0 = compile_source("x0", "per_step", "X[0]")
AGG_MEAN = compile_source("avg", "aggregate", "mean(S)")


def constant_run(run_id: str, d: float, beta: float, x0: float = 1.0, steps: int = 8):
    feats = np.zeros((steps, 3))
    feats[:, 0] = x0
    return make_run(run_id, np.arange(float(steps)), feats, d=d, beta=beta)


def grid_ensemble():
    runs = []
    for d in (1.0, 2.0, 4.0):
        for beta in (-1.0, 0.0, 1.0):
            runs.append(constant_run(f"d{d:g}_b{beta:g}", d, beta))
    return Ensemble(id="grid", runs=tuple(runs), k=1)


class TestBuildGrid:
    def test_midpoint_and_mirrored_edges(self):
        points = [ParameterPoint(d, 0.0) for d in (1.0, 2.0, 4.0)]
        layout = build_grid(points)
        np.testing.assert_array_equal(layout.d_boundaries, [0.5, 1.5, 3.0, 5.0])

    def test_single_value_axis(self):
        layout = build_grid([ParameterPoint(1.0, -2.0)])
        np.testing.assert_array_equal(layout.beta_boundaries, [-2.5, -1.5])
        wide = build_grid([ParameterPoint(1.0, -2.0)], single_half_width=2.0)
        np.testing.assert_array_equal(wide.beta_boundaries, [-4.0, 0.0])

    def test_duplicates_collapse(self):
        points = [ParameterPoint(d, 0.0) for d in (1.0, 1.0, 2.0, 4.0, 4.0)]
        layout = build_grid(points)
        np.testing.assert_array_equal(layout.d_boundaries, [0.5, 1.5, 3.0, 5.0])
        assert layout.n_cols == 3

    def test_cells_tile_and_contain_samples_strictly(self):
        rng = np.random.default_rng(21)
        points = [
            ParameterPoint(float(d), float(b))
            for d in rng.uniform(0, 10, 6)
            for b in rng.uniform(-5, 5, 5)
        ]
        layout = build_grid(points)
        for bounds in (layout.d_boundaries, layout.beta_boundaries):
            assert np.all(np.diff(bounds) > 0)
        # Tiling: widths sum to the overall span exactly.
        assert np.diff(layout.d_boundaries).sum() == pytest.approx(
            layout.d_boundaries[-1] - layout.d_boundaries[0], abs=1e-9
        )
        for point in points:
            row, col = layout.cell_of(point)
            assert layout.d_boundaries[col] < point.d < layout.d_boundaries[col + 1]
            assert (
                layout.beta_boundaries[row] < point.beta < layout.beta_boundaries[row + 1]
            )

    def test_point_outside_grid_rejected(self):
        layout = build_grid([ParameterPoint(1.0, 0.0), ParameterPoint(2.0, 1.0)])
        with pytest.raises(AnalysisError, match="outside"):
            layout.cell_of(ParameterPoint(100.0, 0.0))

    def test_validation(self):
        with pytest.raises(AnalysisError):
            build_grid([])
        # Non-finite parameters never reach the grid; the point itself refuses.
        with pytest.raises(DataValidationError):
            ParameterPoint(2.0, np.inf)


class TestBuildHeatmap:
    def test_one_cell_per_distinct_point(self):
        model = build_heatmap(grid_ensemble(), STEP_D, AGG_MEAN)
        assert len(model.cells) == 9
        assert model.layout.n_rows == 3 and model.layout.n_cols == 3
        for cell in model.cells.values():
            # The step measure is the run's own d, so each cell's value
            # equals the d of the column it sits in.
            assert cell.value == model.layout.d_values[cell.col]
        assert model.value_range == (1.0, 4.0)
        assert model.measure_name == "avg(level)"
        assert model.errors == ()

    def test_shared_cell_averages_values(self):
        runs = (
            constant_run("a", 1.0, 0.0, x0=1.0),
            constant_run("b", 1.0, 0.0, x0=3.0),
            constant_run("c", 2.0, 0.0, x0=5.0),
        )
        ens = Ensemble(id="pair", runs=runs, k=1)
        model = build_heatmap(ens, STEP_X0, AGG_MEAN)
        shared = model.cell(0, 0)
        assert shared.value == 2.0
        assert shared.sample_count == 2
        assert shared.run_ids == ("a", "b")
        assert model.cell(0, 1).value == 5.0

    def test_partial_failures_collected(self):
        short = make_run("tiny", np.arange(4.0), np.ones((4, 3)), d=1.0, beta=0.0)
        good = constant_run("good", 2.0, 0.0, x0=7.0, steps=30)
        ens = Ensemble(id="mix", runs=(short, good), k=1)
        rec = compile_source("rec", "per_step", "recurrence(10)")
        model = build_heatmap(ens, rec, AGG_MEAN)
        assert [f.run_id for f in model.errors] == ["tiny"]
        assert "width" in model.errors[0].message
        assert len(model.cells) == 1
        assert set(model.step_values) == {"good"}

    def test_all_failures_leaves_no_range(self):
        short = make_run("tiny", np.arange(4.0), np.ones((4, 3)), d=1.0, beta=0.0)
        ens = Ensemble(id="bad", runs=(short,), k=1)
        rec = compile_source("rec", "per_step", "recurrence(10)")
        model = build_heatmap(ens, rec, AGG_MEAN)
        assert model.cells == {}
        assert model.value_range is None

    def test_run_order_does_not_matter(self):
        runs = tuple(grid_ensemble().runs)
        forward = Ensemble(id="f", runs=runs, k=1)
        backward = Ensemble(id="b", runs=runs[::-1], k=1)
        a = build_heatmap(forward, STEP_D, AGG_MEAN)
        b = build_heatmap(backward, STEP_D, AGG_MEAN)
        assert heatmap_to_json_dict(a) == heatmap_to_json_dict(b)

    def test_window_is_applied(self):
        run = constant_run("w", 1.0, 0.0, steps=10)
        ens = Ensemble(id="w", runs=(run,), k=1)
        count = compile_source("n", "per_step", "N")
        model = build_heatmap(ens, count, AGG_MEAN, Window(2.0, 5.0))
        assert model.cell(0, 0).value == 4.0

    def test_empty_window_is_a_run_failure(self):
        run = constant_run("w", 1.0, 0.0, steps=10)
        ens = Ensemble(id="w", runs=(run,), k=1)
        model = build_heatmap(ens, STEP_D, AGG_MEAN, Window(100.0, 200.0))
        assert model.cells == {}
        assert model.errors[0].run_id == "w"


class TestSelection:
    def test_region_rectangle_is_closed(self):
        model = build_heatmap(grid_ensemble(), STEP_D, AGG_MEAN)
        selection = select_region(model, (1.0, 2.0), (0.0, 1.0))
        assert selection.origin is SelectionOrigin.REGION_RECT
        assert selection.sorted_ids() == (
            "d1_b0", "d1_b1", "d2_b0", "d2_b1",
        )
        flags = {s.run_id: s.selected for s in model.samples}
        assert flags["d1_b0"] and flags["d2_b1"]
        assert not flags["d4_b1"] and not flags["d1_b-1"]

    def test_region_accepts_reversed_bounds(self):
        model = build_heatmap(grid_ensemble(), STEP_D, AGG_MEAN)
        a = select_region(model, (2.0, 1.0), (1.0, 0.0))
        b = select_region(model, (1.0, 2.0), (0.0, 1.0))
        assert a.run_ids == b.run_ids

    def test_empty_region(self):
        model = build_heatmap(grid_ensemble(), STEP_D, AGG_MEAN)
        selection = select_region(model, (10.0, 11.0), (0.0, 1.0))
        assert selection.run_ids == frozenset()
        assert not any(s.selected for s in model.samples)

    def test_select_cell(self):
        model = build_heatmap(grid_ensemble(), STEP_D, AGG_MEAN)
        row, col = model.layout.cell_of(ParameterPoint(2.0, 1.0))
        selection = select_cell(model, row, col)
        assert selection.origin is SelectionOrigin.CELL_PICK
        assert selection.sorted_ids() == ("d2_b1",)

    def test_select_missing_cell_selects_nothing(self):
        runs = (constant_run("a", 1.0, 0.0), constant_run("b", 2.0, 1.0))
        model = build_heatmap(Ensemble(id="x", runs=runs, k=1), STEP_D, AGG_MEAN)
        selection = select_cell(model, 0, 1)
        assert selection.run_ids == frozenset()

    def test_select_runs_direct(self):
        model = build_heatmap(grid_ensemble(), STEP_D, AGG_MEAN)
        selection = select_runs(model, ["d1_b0", "d4_b1"])
        assert selection.origin is SelectionOrigin.SINGLE_POINT
        flags = {s.run_id: s.selected for s in model.samples}
        assert flags["d1_b0"] and flags["d4_b1"]
        assert sum(flags.values()) == 2

    def test_selection_flags_survive_rebuild(self):
        ens = grid_ensemble()
        model = build_heatmap(ens, STEP_D, AGG_MEAN)
        selection = select_region(model, (1.0, 2.0), (0.0, 1.0))
        rebuilt = build_heatmap(ens, STEP_D, AGG_MEAN, selection=selection)
        flags = {s.run_id: s.selected for s in rebuilt.samples}
        assert flags["d1_b0"] and not flags["d4_b1"]


class TestCellDetail:
    def test_constant_run_histogram(self):
        run = constant_run("a", 1.0, 0.0, x0=3.0, steps=8)
        model = build_heatmap(Ensemble(id="x", runs=(run,), k=1), STEP_X0, AGG_MEAN)
        detail = cell_detail(model, 0, 0)
        assert detail.value == 3.0
        assert detail.run_ids == ("a",)
        np.testing.assert_array_equal(detail.histogram.bin_edges, [2.5, 3.5])
        np.testing.assert_array_equal(detail.histogram.counts, [8])

    def test_concatenates_runs_sharing_a_cell(self):
        runs = (
            constant_run("a", 1.0, 0.0, x0=0.0, steps=5),
            constant_run("b", 1.0, 0.0, x0=1.0, steps=5),
        )
        model = build_heatmap(Ensemble(id="x", runs=runs, k=1), STEP_X0, AGG_MEAN)
        detail = cell_detail(model, 0, 0, bins=2)
        assert detail.histogram.counts.sum() == 10
        np.testing.assert_array_equal(detail.histogram.counts, [5, 5])

    def test_empty_cell_raises(self):
        runs = (constant_run("a", 1.0, 0.0), constant_run("b", 2.0, 1.0))
        model = build_heatmap(Ensemble(id="x", runs=runs, k=1), STEP_D, AGG_MEAN)
        with pytest.raises(AnalysisError, match="empty"):
            cell_detail(model, 0, 1)


class TestExport:
    def test_json_shape(self):
        model = build_heatmap(grid_ensemble(), STEP_D, AGG_MEAN)
        doc = heatmap_to_json_dict(model)
        assert set(doc) == {
            "measure", "d_boundaries", "beta_boundaries", "cells", "samples",
        }
        assert doc["measure"] == "avg(level)"
        assert doc["d_boundaries"] == [0.5, 1.5, 3.0, 5.0]
        assert len(doc["cells"]) == 9
        assert set(doc["cells"][0]) == {"row", "col", "value", "count", "runs"}
        positions = [(c["row"], c["col"]) for c in doc["cells"]]
        assert positions == sorted(positions)
        assert {s["run"] for s in doc["samples"]} == {r.id for r in grid_ensemble().runs}
        json.dumps(doc)

    def test_csv_shape(self):
        model = build_heatmap(grid_ensemble(), STEP_D, AGG_MEAN)
        text = heatmap_to_csv(model)
        lines = text.strip().split("\n")
        assert lines[0] == "row,col,d_low,d_high,beta_low,beta_high,value,count,runs"
        assert len(lines) == 10
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == "0"
        assert float(first[2]) == 0.5 and float(first[3]) == 1.5

    def test_exports_are_deterministic(self):
        ens = grid_ensemble()
        a = build_heatmap(ens, STEP_D, AGG_MEAN)
        b = build_heatmap(ens, STEP_D, AGG_MEAN)
        assert json.dumps(heatmap_to_json_dict(a)) == json.dumps(heatmap_to_json_dict(b))
        assert heatmap_to_csv(a) == heatmap_to_csv(b)


def test_features_keep_unit_norm_through_model(periodic_run):
    # End-to-end sanity: generator output feeds the heatmap unchanged.
    ens = Ensemble(id="one", runs=(periodic_run,), k=7)
    step = compile_source("n", "per_step", "norm(X)")
    model = build_heatmap(ens, step, AGG_MEAN)
    assert model.cell(0, 0).value == pytest.approx(np.sqrt(7.0), abs=1e-9)
