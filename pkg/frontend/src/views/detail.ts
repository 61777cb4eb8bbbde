import type { PcaOut, SeriesOut } from "../api/types.js";
import { extent, linearScale } from "./scale.js";

export const SPLOM_AXIS_CAP = 8;

export interface SplomPanel {
  /** Projected component index on the horizontal axis. */
  xIndex: number;
  /** Projected component index on the vertical axis. */
  yIndex: number;
  points: Array<[number, number]>;
}

/** Pairwise scatter panels of the projected components: an n x n matrix
 * with n = min(intrinsic_dim, cap), never wider than the projection. */
export function splomPanels(pca: PcaOut, cap = SPLOM_AXIS_CAP): SplomPanel[] {
  const projectedWidth = pca.projected.length > 0 ? pca.projected[0].length : 0;
  const axes = Math.min(pca.intrinsic_dim, cap, projectedWidth);
  const panels: SplomPanel[] = [];
  for (let yIndex = 0; yIndex < axes; yIndex++) {
    for (let xIndex = 0; xIndex < axes; xIndex++) {
      panels.push({
        xIndex,
        yIndex,
        points: pca.projected.map((row) => [row[xIndex], row[yIndex]]),
      });
    }
  }
  return panels;
}

/** Number of axes a SPLOM of this PCA result uses per side. */
export function splomAxisCount(pca: PcaOut, cap = SPLOM_AXIS_CAP): number {
  const projectedWidth = pca.projected.length > 0 ? pca.projected[0].length : 0;
  return Math.min(pca.intrinsic_dim, cap, projectedWidth);
}

/** Render the SPLOM as one SVG with a panel grid. */
export function splomSvg(pca: PcaOut, panelSize = 110, gap = 8): string {
  const panels = splomPanels(pca);
  const axes = splomAxisCount(pca);
  const total = axes * panelSize + Math.max(0, axes - 1) * gap;
  const parts: string[] = [];
  parts.push(
    `<svg class="splom" xmlns="http://www.w3.org/2000/svg" ` +
      `width="${total}" height="${total}" viewBox="0 0 ${total} ${total}">`,
  );
  for (const panel of panels) {
    const ox = panel.xIndex * (panelSize + gap);
    const oy = panel.yIndex * (panelSize + gap);
    const xRange = extent(panel.points.map((p) => p[0])) ?? [0, 1];
    const yRange = extent(panel.points.map((p) => p[1])) ?? [0, 1];
    const x = linearScale(xRange, [ox + 2, ox + panelSize - 2]);
    const y = linearScale(yRange, [oy + panelSize - 2, oy + 2]);
    parts.push(
      `<g class="panel" data-x="${panel.xIndex}" data-y="${panel.yIndex}">` +
        `<rect x="${ox}" y="${oy}" width="${panelSize}" height="${panelSize}" ` +
        `fill="none" stroke="#cccccc"/>`,
    );
    for (const [px, py] of panel.points) {
      parts.push(`<circle cx="${x(px).toFixed(1)}" cy="${y(py).toFixed(1)}" r="1" fill="#1f77b4"/>`);
    }
    parts.push("</g>");
  }
  parts.push("</svg>");
  return parts.join("");
}

export interface LatticePosition {
  particle: number;
  x: number;
  y: number;
}

/** Fixed particle positions for the orientation animation: one particle
 * at the origin and six hexagonal neighbors at distance d, 60 degrees
 * apart. Extra particles beyond seven continue outward on a second ring. */
export function latticePositions(k: number, d: number): LatticePosition[] {
  const positions: LatticePosition[] = [{ particle: 0, x: 0, y: 0 }];
  for (let p = 1; p < k; p++) {
    const ring = Math.floor((p - 1) / 6) + 1;
    const angle = (Math.PI / 3) * ((p - 1) % 6);
    positions.push({
      particle: p,
      x: ring * d * Math.cos(angle),
      y: ring * d * Math.sin(angle),
    });
  }
  return positions;
}

/** Orientation columns grouped per particle, zipped into per-step frames.
 * Expects one undecimated series per (particle, axis) so rows align. */
export function orientationFrames(
  seriesByParticle: Array<{ x: SeriesOut; y: SeriesOut; z: SeriesOut }>,
): { times: number[]; frames: number[][][] } {
  if (seriesByParticle.length === 0) return { times: [], frames: [] };
  const times = seriesByParticle[0].x.times;
  const frames: number[][][] = times.map((_, index) =>
    seriesByParticle.map((axes) => [
      axes.x.values[index],
      axes.y.values[index],
      axes.z.values[index],
    ]),
  );
  return { times, frames };}

/** Fixed oblique projection of a 3D orientation onto the drawing plane. */
export function projectOrientation(v: [number, number, number] | number[]): { dx: number; dy: number } {
  return { dx: v[0] + 0.4 * v[2], dy: -v[1] + 0.25 * v[2] };
}

/** Draw one animation frame: an arrow per particle at its lattice slot. */
export function orientationFrameSvg(
  frame: number[][],
  d: number,
  size = 320,
): string {
  const k = frame.length;
  const positions = latticePositions(k, d);
  const spanLimit = Math.max(d * 2.5, 1.5);
  const scale = linearScale([-spanLimit, spanLimit], [0, size]);
  const arrowLen = (size / (2 * spanLimit)) * 0.8;

  const parts: string[] = [];
  parts.push(
    `<svg class="orientation" xmlns="http://www.w3.org/2000/svg" ` +
      `width="${size}" height="${size}" viewBox="0 0 ${size} ${size}">`,
  );
  for (const pos of positions) {
    const head = projectOrientation(frame[pos.particle]);
    const cx = scale(pos.x);
    const cy = scale(-pos.y);
    const tipX = cx + head.dx * arrowLen;
    const tipY = cy + head.dy * arrowLen;
    parts.push(
      `<g class="arrow" data-particle="${pos.particle}">` +
        `<circle cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="2" fill="#888888"/>` +
        `<line x1="${cx.toFixed(1)}" y1="${cy.toFixed(1)}" x2="${tipX.toFixed(1)}" ` +
        `y2="${tipY.toFixed(1)}" stroke="#1f77b4" stroke-width="2"/>` +
        `</g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

export interface PlayerState {
  playing: boolean;
  frame: number;
}

/** Play/pause/scrub controller for the animation; a host drives `tick`
 * from its timer and re-renders on every state change. */
export class Player {
  private state: PlayerState = { playing: false, frame: 0 };

  constructor(
    readonly frameCount: number,
    readonly framesPerSecond = 25,
    private readonly onChange: (state: PlayerState) => void = () => {},
  ) {}

  get playing(): boolean {
    return this.state.playing;
  }

  get frame(): number {
    return this.state.frame;
  }

  play(): void {
    if (this.frameCount === 0) return;
    this.state = { ...this.state, playing: true };
    this.onChange(this.state);
  }

  pause(): void {
    this.state = { ...this.state, playing: false };
    this.onChange(this.state);
  }

  /** Jump to a frame (clamped); scrubbing pauses playback. */
  scrub(frame: number): void {
    const clamped = Math.min(Math.max(0, Math.round(frame)), Math.max(0, this.frameCount - 1));
    this.state = { playing: false, frame: clamped };
    this.onChange(this.state);
  }

  /** Advance according to elapsed milliseconds while playing. */
  tick(elapsedMs: number): void {
    if (!this.state.playing || this.frameCount === 0) return;
    const advance = Math.floor((elapsedMs / 1000) * this.framesPerSecond);
    if (advance < 1) return;
    this.state = {
      playing: true,
      frame: (this.state.frame + advance) % this.frameCount,
    };
    this.onChange(this.state);
  }
}
