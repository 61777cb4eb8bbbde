import type { EvaluateOut, RunSummary } from "../api/types.js";
import { extent, linearScale, type LinearScale } from "./scale.js";
import { viridis } from "./viridis.js";

export type ColorBy = "d" | "beta";

export interface TimeplotOptions {
  width: number;
  height: number;
  colorBy: ColorBy;
  /** Shared time cursor position, drawn as a vertical line when set. */
  cursor?: number | null;
}

export interface TimeplotLine {
  run: string;
  color: string;
  path: string;
}

/** Per-run polyline descriptions: one line per successfully evaluated
 * run, colored by the chosen parameter of that run. */
export function timeplotLines(
  evaluated: EvaluateOut,
  runs: RunSummary[],
  options: TimeplotOptions,
): { lines: TimeplotLine[]; timeScale: LinearScale; valueScale: LinearScale } {
  const byId = new Map(runs.map((r) => [r.id, r]));
  const ok = evaluated.results.filter((r) => r.error === null && r.times && r.values);

  const timeRange = extent(ok.flatMap((r) => r.times ?? [])) ?? [0, 1];
  const valueRange = extent(ok.flatMap((r) => r.values ?? [])) ?? [0, 1];
  const timeScale = linearScale(timeRange, [0, options.width]);
  const valueScale = linearScale(valueRange, [options.height, 0]);

  const paramValues = runs.map((r) => (options.colorBy === "d" ? r.d : r.beta));
  const paramRange = extent(paramValues) ?? [0, 1];

  const lines: TimeplotLine[] = ok.map((result) => {
    const summary = byId.get(result.run);
    const param = summary ? (options.colorBy === "d" ? summary.d : summary.beta) : paramRange[0];
    const t =
      paramRange[1] === paramRange[0]
        ? 0.5
        : (param - paramRange[0]) / (paramRange[1] - paramRange[0]);
    const times = result.times as number[];
    const values = result.values as number[];
    const points = times.map(
      (time, i) => `${timeScale(time).toFixed(2)},${valueScale(values[i]).toFixed(2)}`,
    );
    return { run: result.run, color: viridis(t), path: `M${points.join(" L")}` };
  });

  return { lines, timeScale, valueScale };
}

/** Render the comparative timeplot as an SVG string. */
export function timeplotSvg(
  evaluated: EvaluateOut,
  runs: RunSummary[],
  options: TimeplotOptions,
): string {
  const { lines, timeScale } = timeplotLines(evaluated, runs, options);
  const parts: string[] = [];
  parts.push(
    `<svg class="timeplot" xmlns="http://www.w3.org/2000/svg" ` +
      `width="${options.width}" height="${options.height}" ` +
      `viewBox="0 0 ${options.width} ${options.height}">`,
  );
  for (const line of lines) {
    parts.push(
      `<path class="series" d="${line.path}" fill="none" stroke="${line.color}" ` +
        `stroke-width="1.2" data-run="${line.run}"/>`,
    );
  }
  if (options.cursor !== undefined && options.cursor !== null) {
    const x = timeScale(options.cursor);
    parts.push(
      `<line class="cursor" x1="${x}" y1="0" x2="${x}" y2="${options.height}" ` +
        `stroke="#444444" stroke-dasharray="3,3"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Map a horizontal brush in pixels to a closed [from, to] time window. */
export function windowFromBrush(
  timeScale: LinearScale,
  px0: number,
  px1: number,
): { from: number; to: number } {
  const a = timeScale.invert(px0);
  const b = timeScale.invert(px1);
  return a <= b ? { from: a, to: b } : { from: b, to: a };
}
