import { describe, expect, it } from "vitest";
import type { HeatmapOut } from "../src/api/types.js";
import { AppStore } from "../src/state/store.js";
import {
  cellAtPixel,
  cellTooltip,
  heatmapGeometry,
  heatmapSvg,
  paramRectFromPixels,
} from "../src/views/heatmap.js";
import { histogramSvg } from "../src/views/histogram.js";
import { viridis } from "../src/views/viridis.js";
import { FakeApi, openReadyStore } from "./fakes.js";

function model(): HeatmapOut {
  return {
    measure: "mval",
    d_boundaries: [0, 1, 2],
    beta_boundaries: [0, 1],
    cells: [
      { row: 0, col: 0, value: 0.25, count: 1, runs: ["a"] },
      { row: 0, col: 1, value: 0.75, count: 2, runs: ["b", "c"] },
    ],
    samples: [
      { run: "a", d: 0.5, beta: 0.5 },
      { run: "b", d: 1.5, beta: 0.5 },
    ],
  };
}

describe("cell tooltip", () => {
  it("reports the exact cell value, run count, and run ids", () => {
    expect(cellTooltip(model(), 0, 1)).toEqual({ value: 0.75, count: 2, runs: ["b", "c"] });
    expect(cellTooltip(model(), 3, 0)).toBeNull();
  });

  it("hovering a cell fetches a histogram for one of its runs", async () => {
    const api = new FakeApi();
    const store = new AppStore(api);
    await openReadyStore(api, store);
    await store.setWindow(5, 95);

    await store.hoverCell(1, 1); // cell of run d2_b1 in the fake grid

    const tooltip = store.getState().tooltip;
    expect(tooltip?.value).toBe(3);
    expect(tooltip?.count).toBe(1);
    expect(tooltip?.runs).toEqual(["d2_b1"]);
    expect(tooltip?.histogram.counts).toEqual([60, 40]);

    const call = api.callsTo("histogram").at(-1)!;
    expect(call.args[1]).toBe("d2_b1");
    expect(call.args[2]).toEqual({ measure: "rec", from: 5, to: 95 });
  });

  it("hovering a gap clears the tooltip", async () => {
    const api = new FakeApi();
    const store = new AppStore(api);
    await openReadyStore(api, store);
    await store.hoverCell(1, 1);
    expect(store.getState().tooltip).not.toBeNull();

    await store.hoverCell(7, 7);
    expect(store.getState().tooltip).toBeNull();
  });
});

describe("heatmap rendering", () => {
  it("colors span the viridis ramp from min to max cell value", () => {
    const svg = heatmapSvg(model(), {
      width: 200,
      height: 100,
      selection: { run_ids: [], origin: "single_point" },
    });
    expect(viridis(0)).toBe("#440154");
    expect(viridis(1)).toBe("#fde725");
    expect(svg).toContain(`fill="#440154"`); // min-value cell
    expect(svg).toContain(`fill="#fde725"`); // max-value cell
  });

  it("dims cells outside an active selection and marks selected samples", () => {
    const svg = heatmapSvg(model(), {
      width: 200,
      height: 100,
      selection: { run_ids: ["b"], origin: "single_point" },
    });
    const cellA = svg.match(/<rect[^>]*data-row="0" data-col="0"[^>]*\/>/)![0];
    const cellB = svg.match(/<rect[^>]*data-row="0" data-col="1"[^>]*\/>/)![0];
    expect(cellA).toContain(`fill-opacity="0.5"`);
    expect(cellB).not.toContain("fill-opacity");
    expect(svg).toContain(`fill="#d62728" data-run="b"`);
    expect(svg).toContain(`fill="#000000" data-run="a"`);
  });

  it("hatches grid positions with no simulated runs", () => {
    const sparse = model();
    sparse.beta_boundaries = [0, 1, 2]; // two rows, but row 1 has no cells
    const svg = heatmapSvg(sparse, {
      width: 200,
      height: 100,
      selection: { run_ids: [], origin: "single_point" },
    });
    expect(svg).toContain(`<pattern id="missing-cell"`);
    expect(svg.match(/url\(#missing-cell\)/g)).toHaveLength(2);
  });

  it("renders equal-value cells mid-ramp instead of dividing by zero", () => {
    const flat = model();
    flat.cells = flat.cells.map((c) => ({ ...c, value: 2 }));
    const svg = heatmapSvg(flat, {
      width: 200,
      height: 100,
      selection: { run_ids: [], origin: "single_point" },
    });
    expect(svg).toContain(`fill="${viridis(0.5)}"`);
  });
});

describe("pixel mapping", () => {
  it("maps pixels to cells and back out of range to null", () => {
    const m = model();
    const geom = heatmapGeometry(m, 200, 100);
    expect(cellAtPixel(m, geom, 50, 50)).toEqual({ row: 0, col: 0 });
    expect(cellAtPixel(m, geom, 150, 50)).toEqual({ row: 0, col: 1 });
    expect(cellAtPixel(m, geom, -5, 50)).toBeNull();
    expect(cellAtPixel(m, geom, 50, 150)).toBeNull();
  });

  it("turns a dragged pixel rectangle into ordered parameter ranges", () => {
    const geom = heatmapGeometry(model(), 200, 100);
    // Drag from lower-right to upper-left; ranges still come out ordered.
    const rect = paramRectFromPixels(geom, 160, 90, 40, 10);
    expect(rect.dRange[0]).toBeCloseTo(0.4, 12);
    expect(rect.dRange[1]).toBeCloseTo(1.6, 12);
    expect(rect.betaRange[0]).toBeCloseTo(0.1, 12);
    expect(rect.betaRange[1]).toBeCloseTo(0.9, 12);
  });
});

describe("tooltip histogram rendering", () => {
  it("draws one bar per bin with counts attached", () => {
    const svg = histogramSvg({ bin_edges: [0, 1, 2, 3], counts: [5, 0, 9] });
    expect(svg.match(/<rect/g)).toHaveLength(3);
    expect(svg).toContain(`data-count="9"`);
  });
});
