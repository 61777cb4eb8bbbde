/** Perceptually uniform viridis color map, sampled at 33 stops and
 * linearly interpolated in RGB between neighbors. */

const STOPS = [
  "#440154", "#470d60", "#48186a", "#482374", "#472d7b", "#453781",
  "#424086", "#3e4989", "#3b528b", "#375b8d", "#33638d", "#2f6b8e",
  "#2c728e", "#297a8e", "#26828e", "#23898e", "#21918c", "#1f988b",
  "#1fa088", "#22a785", "#28ae80", "#32b67a", "#3fbc73", "#4ec36b",
  "#5ec962", "#70cf57", "#84d44b", "#98d83e", "#addc30", "#c2df23",
  "#d8e219", "#ece51b", "#fde725",
];

function channels(hex: string): [number, number, number] {
  return [
    parseInt(hex.slice(1, 3), 16),
    parseInt(hex.slice(3, 5), 16),
    parseInt(hex.slice(5, 7), 16),
  ];
}

const RGB = STOPS.map(channels);

function hex2(value: number): string {
  return Math.round(value).toString(16).padStart(2, "0");
}

/** Map t in [0, 1] (clamped) to a viridis hex color. */
export function viridis(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  const position = clamped * (RGB.length - 1);
  const lower = Math.floor(position);
  if (lower === RGB.length - 1) return STOPS[STOPS.length - 1];
  const frac = position - lower;
  const [r0, g0, b0] = RGB[lower];
  const [r1, g1, b1] = RGB[lower + 1];
  return `#${hex2(r0 + (r1 - r0) * frac)}${hex2(g0 + (g1 - g0) * frac)}${hex2(b0 + (b1 - b0) * frac)}`;
}
