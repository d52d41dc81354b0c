/** Quantiles and Gaussian kernel density estimation for violin shapes. */

/** Linear-interpolation quantile (same convention as numpy's default). */
export function quantile(sorted: readonly number[], q: number): number {
  if (sorted.length === 0) throw new Error("quantile of empty sample");
  const pos = q * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

export function median(values: readonly number[]): number {
  return quantile([...values].sort((a, b) => a - b), 0.5);
}

function std(values: readonly number[]): number {
  const mean = values.reduce((s, v) => s + v, 0) / values.length;
  const variance =
    values.reduce((s, v) => s + (v - mean) * (v - mean), 0) / values.length;
  return Math.sqrt(variance);
}

/** Silverman's rule of thumb; floored so identical samples still render. */
export function silvermanBandwidth(values: readonly number[]): number {
  const sorted = [...values].sort((a, b) => a - b);
  const iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const sigma = std(values);
  const scale = Math.min(sigma, iqr / 1.34) || sigma || 0;
  const bw = 0.9 * scale * Math.pow(values.length, -0.2);
  if (bw > 0) return bw;
  const magnitude = Math.abs(sorted[sorted.length - 1]) || 1;
  return magnitude * 1e-3;
}

export interface DensityPoint {
  y: number;
  density: number;
}

/**
 * Gaussian KDE evaluated on an even grid spanning the sample range.
 * The grid is clipped to the observed extent so violins do not extend
 * past the data.
 */
export function densityCurve(
  values: readonly number[],
  points = 61,
): DensityPoint[] {
  const bw = silvermanBandwidth(values);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || bw;
  const curve: DensityPoint[] = [];
  const norm = 1 / (values.length * bw * Math.sqrt(2 * Math.PI));
  for (let i = 0; i < points; i++) {
    const y = lo + (span * i) / (points - 1);
    let density = 0;
    for (const v of values) {
      const z = (y - v) / bw;
      density += Math.exp(-0.5 * z * z);
    }
    curve.push({ y, density: density * norm });
  }
  return curve;
}
