/** Browser shell: wires the store to the DOM. All rendering goes through
 * the pure view modules; this file only moves strings and events. */
import { ApiClient } from "./api/client.js";
import type { MeasureKind, SeriesOut } from "./api/types.js";
import { AppStore, type StoreState } from "./state/store.js";
import {
  cellAtPixel,
  heatmapGeometry,
  heatmapSvg,
  paramRectFromPixels,
} from "./views/heatmap.js";
import { histogramSvg } from "./views/histogram.js";
import { escapeText } from "./views/scale.js";
import {
  orientationFrames,
  orientationFrameSvg,
  Player,
  splomSvg,
} from "./views/detail.js";
import {
  timeplotLines,
  timeplotSvg,
  windowFromBrush,
  type ColorBy,
} from "./views/timeplot.js";

const HEATMAP_W = 420;
const HEATMAP_H = 320;
const TIMEPLOT_W = 640;
const TIMEPLOT_H = 240;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const api = new ApiClient("");
const store = new AppStore(api);

const openForm = el<HTMLFormElement>("open-form");
const pathInput = el<HTMLInputElement>("ensemble-path");
const statusLine = el<HTMLElement>("status-line");

const measureForm = el<HTMLFormElement>("measure-form");
const measureName = el<HTMLInputElement>("measure-name");
const measureKind = el<HTMLSelectElement>("measure-kind");
const measureSource = el<HTMLTextAreaElement>("measure-source");
const measureErrorBox = el<HTMLElement>("measure-error");

const heatmapBox = el<HTMLElement>("heatmap");
const tooltipBox = el<HTMLElement>("tooltip");
const timeplotBox = el<HTMLElement>("timeplot");
const windowLabel = el<HTMLElement>("window-label");
const colorByForm = el<HTMLFormElement>("color-by");

const splomBox = el<HTMLElement>("splom");
const detailTitle = el<HTMLElement>("detail-title");
const animationBox = el<HTMLElement>("animation");
const playButton = el<HTMLButtonElement>("anim-play");
const scrubSlider = el<HTMLInputElement>("anim-scrub");

let player: Player | null = null;
let animation: { times: number[]; frames: number[][][]; d: number } | null = null;

function render(state: StoreState): void {
  const runs = state.ensemble?.runs ?? [];

  statusLine.textContent = state.ensemble
    ? `${state.ensemble.runs.length} runs, k=${state.ensemble.k} (D=${state.ensemble.D})`
    : "no ensemble loaded";

  measureErrorBox.textContent = state.measureError
    ? `${state.measureError.message} (line ${state.measureError.line}, col ${state.measureError.col})`
    : "";

  heatmapBox.innerHTML = state.heatmap
    ? heatmapSvg(state.heatmap, {
        width: HEATMAP_W,
        height: HEATMAP_H,
        selection: state.selection,
      })
    : "";

  if (state.tooltip) {
    tooltipBox.style.display = "block";
    tooltipBox.innerHTML =
      `<div>value ${state.tooltip.value.toPrecision(6)} · ${state.tooltip.count} run(s)</div>` +
      `<div>${escapeText(state.tooltip.runs.join(", "))}</div>` +
      histogramSvg(state.tooltip.histogram);
  } else {
    tooltipBox.style.display = "none";
  }

  timeplotBox.innerHTML = state.timeplot
    ? timeplotSvg(state.timeplot, runs, {
        width: TIMEPLOT_W,
        height: TIMEPLOT_H,
        colorBy: state.colorBy,
        cursor: state.timeCursor,
      })
    : "";

  windowLabel.textContent =
    state.window.from === null && state.window.to === null
      ? "window: full series"
      : `window: [${state.window.from ?? "start"}, ${state.window.to ?? "end"}]`;

  if (state.pca && state.detailRunId) {
    detailTitle.textContent = `${state.detailRunId} — intrinsic dimension ${state.pca.intrinsic_dim}` +
      (state.pca.degenerate ? " (degenerate)" : "");
    splomBox.innerHTML = splomSvg(state.pca);
  } else {
    detailTitle.textContent = "no run selected";
    splomBox.innerHTML = "";
  }

  if (state.lastError) statusLine.textContent += ` — ${state.lastError}`;
}

store.subscribe(render);

openForm.addEventListener("submit", (event) => {
  event.preventDefault();
  void store.open(pathInput.value).then(() => loadAnimationSeries(null));
});

measureForm.addEventListener("submit", (event) => {
  event.preventDefault();
  void store.submitMeasure({
    name: measureName.value,
    kind: measureKind.value as MeasureKind,
    source: measureSource.value,
  });
});

colorByForm.addEventListener("change", () => {
  const picked = new FormData(colorByForm).get("color-by");
  if (picked === "d" || picked === "beta") store.setColorBy(picked as ColorBy);
});

// Heatmap: hover shows the cell tooltip, drag selects a parameter
// rectangle, a plain click on a sample dot selects that single run.
let dragStart: { x: number; y: number } | null = null;

function heatmapPixel(event: MouseEvent): { x: number; y: number } {
  const box = heatmapBox.getBoundingClientRect();
  return { x: event.clientX - box.left, y: event.clientY - box.top };
}

heatmapBox.addEventListener("mousemove", (event) => {
  const state = store.getState();
  if (!state.heatmap || dragStart) return;
  const { x, y } = heatmapPixel(event);
  const geom = heatmapGeometry(state.heatmap, HEATMAP_W, HEATMAP_H);
  const cell = cellAtPixel(state.heatmap, geom, x, y);
  if (!cell) {
    store.clearTooltip();
    return;
  }
  const current = state.tooltip;
  if (current && current.row === cell.row && current.col === cell.col) return;
  void store.hoverCell(cell.row, cell.col);
});

heatmapBox.addEventListener("mouseleave", () => store.clearTooltip());

heatmapBox.addEventListener("mousedown", (event) => {
  dragStart = heatmapPixel(event);
});

heatmapBox.addEventListener("mouseup", (event) => {
  if (!dragStart) return;
  const start = dragStart;
  dragStart = null;
  const state = store.getState();
  if (!state.heatmap) return;
  const end = heatmapPixel(event);
  const moved = Math.hypot(end.x - start.x, end.y - start.y) > 3;
  if (moved) {
    const geom = heatmapGeometry(state.heatmap, HEATMAP_W, HEATMAP_H);
    const rect = paramRectFromPixels(geom, start.x, start.y, end.x, end.y);
    void store.selectRegion(rect.dRange, rect.betaRange);
    return;
  }
  const target = event.target as Element;
  const run = target.getAttribute("data-run");
  if (run) {
    void store.selectRuns([run]).then(() => openDetail(run));
  }
});

// Timeplot: drag brushes a time window, double-click clears it, and a
// click on a line opens that run in the detail views.
let brushStart: number | null = null;

function timeplotPixel(event: MouseEvent): number {
  return event.clientX - timeplotBox.getBoundingClientRect().left;
}

timeplotBox.addEventListener("mousedown", (event) => {
  brushStart = timeplotPixel(event);
});

timeplotBox.addEventListener("mouseup", (event) => {
  if (brushStart === null) return;
  const start = brushStart;
  brushStart = null;
  const state = store.getState();
  if (!state.timeplot || !state.ensemble) return;
  const end = timeplotPixel(event);
  if (Math.abs(end - start) > 3) {
    const { timeScale } = timeplotLines(state.timeplot, state.ensemble.runs, {
      width: TIMEPLOT_W,
      height: TIMEPLOT_H,
      colorBy: state.colorBy,
    });
    const window = windowFromBrush(timeScale, start, end);
    void store.setWindow(window.from, window.to);
    return;
  }
  const run = (event.target as Element).getAttribute("data-run");
  if (run) void openDetail(run);
});

timeplotBox.addEventListener("dblclick", () => {
  void store.setWindow(null, null);
});

// Detail views: PCA SPLOM plus the orientation animation. Animation
// frames come from undecimated per-particle series so rows align.
async function openDetail(runId: string): Promise<void> {
  await store.openDetail(runId);
  await loadAnimationSeries(runId);
}

async function loadAnimationSeries(runId: string | null): Promise<void> {
  const state = store.getState();
  const ensemble = state.ensemble;
  player = null;
  animation = null;
  animationBox.innerHTML = "";
  if (!ensemble || !runId) return;
  const summary = ensemble.runs.find((r) => r.id === runId);
  if (!summary) return;

  const perParticle: Array<{ x: SeriesOut; y: SeriesOut; z: SeriesOut }> = [];
  for (let particle = 0; particle < ensemble.k; particle++) {
    const [x, y, z] = await Promise.all([
      api.getSeries(ensemble.ensemble_id, runId, { particle, axis: "x" }),
      api.getSeries(ensemble.ensemble_id, runId, { particle, axis: "y" }),
      api.getSeries(ensemble.ensemble_id, runId, { particle, axis: "z" }),
    ]);
    perParticle.push({ x, y, z });
  }
  const built = orientationFrames(perParticle);
  animation = { ...built, d: summary.d };
  scrubSlider.max = String(Math.max(0, built.frames.length - 1));
  scrubSlider.value = "0";
  player = new Player(built.frames.length, 25, (playerState) => {
    if (!animation) return;
    animationBox.innerHTML = orientationFrameSvg(
      animation.frames[playerState.frame],
      animation.d,
    );
    scrubSlider.value = String(playerState.frame);
    playButton.textContent = playerState.playing ? "pause" : "play";
    store.setTimeCursor(animation.times[playerState.frame]);
  });
  player.scrub(0);
}

playButton.addEventListener("click", () => {
  if (!player) return;
  if (player.playing) player.pause();
  else player.play();
});

scrubSlider.addEventListener("input", () => {
  player?.scrub(Number(scrubSlider.value));
});

let lastTick = performance.now();
function animationLoop(now: number): void {
  if (player && player.playing && now - lastTick >= 1000 / 25) {
    player.tick(now - lastTick);
    lastTick = now;
  } else if (!player || !player.playing) {
    lastTick = now;
  }
  requestAnimationFrame(animationLoop);
}
requestAnimationFrame(animationLoop);

render(store.getState());
