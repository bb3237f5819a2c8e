/**
 * Tabular LIME: per instance, sample a Gaussian neighborhood feature-wise,
 * weight samples by an exponential proximity kernel in standardized space,
 * and fit a weighted ridge surrogate to the model's probability output. The
 * surrogate's coefficients (in standardized units) are the explanation.
 */

import { weightedRidge } from "./linalg.js";
import { ProbModel } from "./logistic.js";
import { Prng } from "./prng.js";

export interface LimeOptions {
  numSamples?: number;
  kernelWidth?: number; // defaults to 0.75 * sqrt(d), the common heuristic
  ridge?: number;
  seed?: number;
}

export interface ColumnStats {
  mean: number[];
  std: number[];
}

export function columnStats(X: number[][]): ColumnStats {
  const n = X.length;
  const d = X[0].length;
  const mean = new Array(d).fill(0);
  const std = new Array(d).fill(0);
  for (const row of X) for (let j = 0; j < d; j++) mean[j] += row[j] / n;
  for (const row of X) {
    for (let j = 0; j < d; j++) {
      const diff = row[j] - mean[j];
      std[j] += (diff * diff) / n;
    }
  }
  for (let j = 0; j < d; j++) {
    std[j] = Math.sqrt(std[j]);
    // constant columns accumulate ~1e-16 of float noise; perturbing them at
    // that scale and then standardizing would inject full-scale noise
    if (std[j] < 1e-12 * (Math.abs(mean[j]) + 1)) std[j] = 0;
  }
  return { mean, std };
}

/** Explanation coefficients for one instance, one value per feature. */
export function explainInstance(
  model: ProbModel,
  x: number[],
  stats: ColumnStats,
  options: LimeOptions = {}
): number[] {
  const d = x.length;
  const numSamples = options.numSamples ?? 1000;
  const kernelWidth = options.kernelWidth ?? 0.75 * Math.sqrt(d);
  const ridge = options.ridge ?? 1e-3;
  const rng = new Prng(options.seed ?? 0);

  const scale = stats.std.map((s) => (s > 0 ? s : 1));
  const samples: number[][] = [x.slice()];
  for (let k = 1; k < numSamples; k++) {
    samples.push(x.map((v, j) => (stats.std[j] > 0 ? v + rng.normal() * stats.std[j] : v)));
  }
  const probs = model.predictProba(samples);

  // standardized design with intercept, plus proximity weights
  const design: number[][] = [];
  const weights: number[] = [];
  for (const z of samples) {
    const zs = z.map((v, j) => (v - x[j]) / scale[j]);
    let dist2 = 0;
    for (const v of zs) dist2 += v * v;
    weights.push(Math.exp(-dist2 / (kernelWidth * kernelWidth)));
    design.push([1, ...zs]);
  }
  const beta = weightedRidge(design, probs, weights, ridge);
  return beta.slice(1); // drop the intercept
}
