export type Rgb = [number, number, number];

/** Piecewise-linear interpolation through a list of (t, color) stops. */
function lerpStops(stops: Array<[number, Rgb]>, t: number): Rgb {
  const x = Math.max(stops[0][0], Math.min(stops[stops.length - 1][0], t));
  for (let i = 1; i < stops.length; ++i) {
    const [t0, c0] = stops[i - 1];
    const [t1, c1] = stops[i];
    if (x <= t1) {
      const u = t1 === t0 ? 0 : (x - t0) / (t1 - t0);
      return [
        Math.round(c0[0] + u * (c1[0] - c0[0])),
        Math.round(c0[1] + u * (c1[1] - c0[1])),
        Math.round(c0[2] + u * (c1[2] - c0[2])),
      ];
    }
  }
  return stops[stops.length - 1][1];
}

// Blue through white through red, white pinned exactly at the middle so a
// zero value is visually neutral and sign structure stands out.
const DIVERGING_STOPS: Array<[number, Rgb]> = [
  [-1.0, [5, 48, 97]],
  [-0.5, [67, 147, 195]],
  [-0.15, [190, 220, 238]],
  [0.0, [255, 255, 255]],
  [0.15, [246, 200, 170]],
  [0.5, [214, 96, 77]],
  [1.0, [103, 0, 31]],
];

// Dark blue to pale yellow ramp for nonnegative fields.
const SEQUENTIAL_STOPS: Array<[number, Rgb]> = [
  [0.0, [13, 8, 135]],
  [0.33, [126, 3, 168]],
  [0.66, [225, 100, 98]],
  [1.0, [240, 249, 33]],
];

/**
 * Signed value to color. The scale is symmetric: the half-range is
 * max(|lo|, |hi|), so zero always lands on white even when the data are
 * lopsided.
 */
export function divergingColor(value: number, lo: number, hi: number): Rgb {
  const half = Math.max(Math.abs(lo), Math.abs(hi)) || 1;
  return lerpStops(DIVERGING_STOPS, value / half);
}

/** Unsigned value to color, t clamped to [0, 1]. */
export function sequentialColor(value: number, lo: number, hi: number): Rgb {
  const t = hi === lo ? 0 : (value - lo) / (hi - lo);
  return lerpStops(SEQUENTIAL_STOPS, t);
}

export function toHex([r, g, b]: Rgb): string {
  const h = (v: number) => v.toString(16).padStart(2, "0");
  return `#${h(r)}${h(g)}${h(b)}`;
}

/** Distinct line colors for overlaid series, cycled by index. */
export const LINE_COLORS = [
  "#4361ee",
  "#e63946",
  "#2d6a4f",
  "#9d4edd",
  "#f77f00",
  "#118ab2",
];
