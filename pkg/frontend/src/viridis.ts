/** Viridis color scale (continuous, colorblind-safe) and the dashboard's
 * value→color mapping.
 *
 * Orientation rule: "better" is always the bright (yellow) end — throughput
 * maps high→bright, ping maps low→bright.
 */

import { Metric, lowerIsBetter } from './types.js';

// evenly spaced viridis anchors, dark purple → bright yellow
const STOPS = [
  '#440154', '#481567', '#482677', '#453781', '#404788',
  '#39568c', '#33638d', '#2d708e', '#287d8e', '#238a8d',
  '#1f968b', '#20a387', '#29af7f', '#3cbb75', '#55c667',
  '#73d055', '#95d840', '#b8de29', '#dce319', '#fde725',
] as const;

const RGB = STOPS.map((hex) => [
  parseInt(hex.slice(1, 3), 16),
  parseInt(hex.slice(3, 5), 16),
  parseInt(hex.slice(5, 7), 16),
]) as ReadonlyArray<readonly [number, number, number]>;

/** Viridis color for t in [0, 1] (0 = dark, 1 = bright). */
export function viridis(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const scaled = clamped * (RGB.length - 1);
  const lo = Math.floor(scaled);
  const hi = Math.min(lo + 1, RGB.length - 1);
  const frac = scaled - lo;
  const a = RGB[lo]!;
  const b = RGB[hi]!;
  const mix = (k: 0 | 1 | 2) => Math.round(a[k] + (b[k] - a[k]) * frac);
  return `rgb(${mix(0)},${mix(1)},${mix(2)})`;
}

export interface ColorScale {
  min: number;
  max: number;
  /** Position in [0,1] along the viridis ramp for a value. */
  position(value: number): number;
  color(value: number): string;
  /** CSS gradient stops, left (= min value) to right (= max value). */
  cssGradient(): string;
  /** Which numeric end is "better" under the orientation rule. */
  betterEnd: 'min' | 'max';
}

/**
 * Per-response min/max normalization: the extremes of this response map to
 * the scale's endpoints, inverted for ping so better stays bright.
 */
export function colorScale(values: number[], metric: Metric): ColorScale {
  const min = values.length ? Math.min(...values) : 0;
  const max = values.length ? Math.max(...values) : 1;
  const invert = lowerIsBetter(metric);
  const span = max - min;
  const position = (value: number): number => {
    if (span <= 0) return 0.5;
    const t = (value - min) / span;
    return invert ? 1 - t : t;
  };
  return {
    min,
    max,
    position,
    color: (value) => viridis(position(value)),
    cssGradient: () => {
      const left = viridis(position(min));
      const middle = viridis(position(min + span / 2));
      const right = viridis(position(max));
      return `linear-gradient(to right, ${left}, ${middle}, ${right})`;
    },
    betterEnd: invert ? 'min' : 'max',
  };
}

/** Categorical colors for chart lines (one per site), figure-style. */
const SERIES_COLORS = ['#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd', '#8c564b'];

export function seriesColor(index: number): string {
  return SERIES_COLORS[index % SERIES_COLORS.length]!;
}
