/** Fixed viridis-like color ramp so field renders are reproducible.
 * Eight anchor colors sampled from the standard viridis table, linearly
 * interpolated in RGB. */

const RAMP: [number, number, number][] = [
  [68, 1, 84],
  [70, 50, 127],
  [54, 92, 141],
  [39, 127, 142],
  [31, 161, 135],
  [74, 194, 109],
  [159, 218, 58],
  [253, 231, 37],
];

/** Map a value in [min, max] to a css color string. A degenerate range
 * (min == max) maps everything to the middle of the ramp. */
export function valueToColor(value: number, min: number, max: number): string {
  let t = max > min ? (value - min) / (max - min) : 0.5;
  t = Math.min(1, Math.max(0, t));
  const x = t * (RAMP.length - 1);
  const i = Math.min(RAMP.length - 2, Math.floor(x));
  const f = x - i;
  const c = RAMP[i].map((a, k) => Math.round(a + f * (RAMP[i + 1][k] - a)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}
