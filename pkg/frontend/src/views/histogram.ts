import type { HistogramOut } from "../api/types.js";
import { linearScale } from "./scale.js";

/** Render a small histogram (tooltip sized) as an SVG string. */
export function histogramSvg(hist: HistogramOut, width = 160, height = 60): string {
  const edges = hist.bin_edges;
  const counts = hist.counts;
  const maxCount = Math.max(1, ...counts);
  const x = linearScale([edges[0], edges[edges.length - 1]], [0, width]);
  const y = linearScale([0, maxCount], [height, 0]);

  const parts: string[] = [];
  parts.push(
    `<svg class="histogram" xmlns="http://www.w3.org/2000/svg" ` +
      `width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  for (let i = 0; i < counts.length; i++) {
    const x0 = x(edges[i]);
    const x1 = x(edges[i + 1]);
    const top = y(counts[i]);
    parts.push(
      `<rect class="bar" x="${x0}" y="${top}" width="${Math.max(0, x1 - x0)}" ` +
        `height="${height - top}" fill="#31688e" data-count="${counts[i]}"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
