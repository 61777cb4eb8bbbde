import type { HeatmapOut, SelectionOut } from "../api/types.js";
import { escapeText, extent, linearScale, type LinearScale } from "./scale.js";
import { viridis } from "./viridis.js";

export interface HeatmapGeometry {
  dScale: LinearScale;
  betaScale: LinearScale;
  width: number;
  height: number;
}

export interface HeatmapRenderOptions {
  width: number;
  height: number;
  selection: SelectionOut;
}

export interface CellTooltip {
  value: number;
  count: number;
  runs: string[];
}

/** Parameter-space scales for a heatmap panel; beta grows upward. */
export function heatmapGeometry(model: HeatmapOut, width: number, height: number): HeatmapGeometry {
  const d = model.d_boundaries;
  const beta = model.beta_boundaries;
  return {
    dScale: linearScale([d[0], d[d.length - 1]], [0, width]),
    betaScale: linearScale([beta[0], beta[beta.length - 1]], [height, 0]),
    width,
    height,
  };
}

/** Exact cell value plus its run list, for the hover tooltip. */
export function cellTooltip(model: HeatmapOut, row: number, col: number): CellTooltip | null {
  const cell = model.cells.find((c) => c.row === row && c.col === col);
  if (!cell) return null;
  return { value: cell.value, count: cell.count, runs: cell.runs };
}

/** Cell under a pixel position, or null outside the grid. */
export function cellAtPixel(
  model: HeatmapOut,
  geom: HeatmapGeometry,
  x: number,
  y: number,
): { row: number; col: number } | null {
  const d = geom.dScale.invert(x);
  const beta = geom.betaScale.invert(y);
  const col = intervalIndex(model.d_boundaries, d);
  const row = intervalIndex(model.beta_boundaries, beta);
  return col < 0 || row < 0 ? null : { row, col };
}

function intervalIndex(boundaries: number[], value: number): number {
  for (let i = 0; i + 1 < boundaries.length; i++) {
    if (value >= boundaries[i] && value <= boundaries[i + 1]) return i;
  }
  return -1;
}

/** Map a dragged pixel rectangle to closed parameter ranges. */
export function paramRectFromPixels(
  geom: HeatmapGeometry,
  x0: number,
  y0: number,
  x1: number,
  y1: number,
): { dRange: [number, number]; betaRange: [number, number] } {
  const d = [geom.dScale.invert(x0), geom.dScale.invert(x1)].sort((a, b) => a - b);
  const beta = [geom.betaScale.invert(y0), geom.betaScale.invert(y1)].sort((a, b) => a - b);
  return { dRange: [d[0], d[1]], betaRange: [beta[0], beta[1]] };
}

function isCellSelected(runs: string[], selected: ReadonlySet<string>): boolean {
  return runs.some((id) => selected.has(id));
}

/** Render the state diagram: viridis-filled cells (half saturation for
 * cells outside an active selection), hatched gaps for missing cells,
 * and sample dots in black or red by selection state. */
export function heatmapSvg(model: HeatmapOut, options: HeatmapRenderOptions): string {
  const geom = heatmapGeometry(model, options.width, options.height);
  const selected = new Set(options.selection.run_ids);
  const selectionActive = selected.size > 0;
  const range = extent(model.cells.map((c) => c.value));

  const parts: string[] = [];
  parts.push(
    `<svg class="heatmap" xmlns="http://www.w3.org/2000/svg" ` +
      `width="${options.width}" height="${options.height}" ` +
      `viewBox="0 0 ${options.width} ${options.height}">`,
  );
  parts.push(
    `<defs><pattern id="missing-cell" width="6" height="6" patternUnits="userSpaceOnUse">` +
      `<rect width="6" height="6" fill="#f2f2f2"/>` +
      `<path d="M0,6 L6,0" stroke="#c0c0c0" stroke-width="1"/>` +
      `</pattern></defs>`,
  );

  const present = new Set(model.cells.map((c) => `${c.row}:${c.col}`));
  const nRows = model.beta_boundaries.length - 1;
  const nCols = model.d_boundaries.length - 1;
  for (let row = 0; row < nRows; row++) {
    for (let col = 0; col < nCols; col++) {
      if (present.has(`${row}:${col}`)) continue;
      parts.push(cellRect(model, geom, row, col, 'fill="url(#missing-cell)"'));
    }
  }

  for (const cell of model.cells) {
    const t =
      range === null || range[1] === range[0]
        ? 0.5
        : (cell.value - range[0]) / (range[1] - range[0]);
    const dimmed = selectionActive && !isCellSelected(cell.runs, selected);
    const attrs =
      `fill="${viridis(t)}"` +
      (dimmed ? ` fill-opacity="0.5"` : "") +
      ` data-row="${cell.row}" data-col="${cell.col}"`;
    parts.push(cellRect(model, geom, cell.row, cell.col, attrs));
  }

  for (const sample of model.samples) {
    const color = selected.has(sample.run) ? "#d62728" : "#000000";
    parts.push(
      `<circle class="sample" cx="${geom.dScale(sample.d)}" cy="${geom.betaScale(sample.beta)}" ` +
        `r="2.5" fill="${color}" data-run="${escapeText(sample.run)}"/>`,
    );
  }

  parts.push("</svg>");
  return parts.join("");
}

function cellRect(
  model: HeatmapOut,
  geom: HeatmapGeometry,
  row: number,
  col: number,
  attrs: string,
): string {
  const x0 = geom.dScale(model.d_boundaries[col]);
  const x1 = geom.dScale(model.d_boundaries[col + 1]);
  const yTop = geom.betaScale(model.beta_boundaries[row + 1]);
  const yBottom = geom.betaScale(model.beta_boundaries[row]);
  const width = x1 - x0;
  const height = yBottom - yTop;
  return `<rect class="cell" x="${x0}" y="${yTop}" width="${width}" height="${height}" ${attrs}/>`;
}
