/**
 * KernelSHAP against a single mean-background reference.
 *
 * For each instance x, coalition vectors z_S take x's values on S and the
 * background's elsewhere; attributions solve the Shapley-kernel-weighted
 * regression of f(z_S) - f(bg) on the coalition masks under the efficiency
 * constraint sum(phi) = f(x) - f(bg). Coalitions are enumerated exactly up
 * to `maxExactFeatures` features and sampled (size-stratified, seeded)
 * beyond that.
 */

import { solve } from "./linalg.js";
import { ProbModel } from "./logistic.js";
import { Prng } from "./prng.js";

export interface ShapOptions {
  numSamples?: number;
  maxExactFeatures?: number;
  seed?: number;
}

function binom(n: number, k: number): number {
  let result = 1;
  for (let i = 0; i < k; i++) result = (result * (n - i)) / (i + 1);
  return result;
}

function kernelWeight(d: number, size: number): number {
  return (d - 1) / (binom(d, size) * size * (d - size));
}

/** Solve the constrained weighted regression for one instance. */
function solveShapley(
  masks: number[][],
  targets: number[],
  weights: number[],
  total: number,
  d: number
): number[] {
  if (d === 1) return [total];
  // substitute phi_{d-1} = total - sum(others) to enforce efficiency exactly
  const dim = d - 1;
  const A: number[][] = Array.from({ length: dim }, () => new Array(dim).fill(0));
  const b = new Array(dim).fill(0);
  for (let k = 0; k < masks.length; k++) {
    const mask = masks[k];
    const last = mask[d - 1];
    const y = targets[k] - last * total;
    const w = weights[k];
    for (let p = 0; p < dim; p++) {
      const xp = mask[p] - last;
      if (xp === 0) continue;
      b[p] += w * xp * y;
      for (let q = p; q < dim; q++) {
        const xq = mask[q] - last;
        if (xq !== 0) A[p][q] += w * xp * xq;
      }
    }
  }
  for (let p = 0; p < dim; p++) {
    for (let q = 0; q < p; q++) A[p][q] = A[q][p];
    A[p][p] += 1e-12;
  }
  const phi = solve(A, b);
  const phiLast = total - phi.reduce((acc, v) => acc + v, 0);
  return [...phi, phiLast];
}

function enumerateMasks(d: number): number[][] {
  const masks: number[][] = [];
  for (let bits = 1; bits < (1 << d) - 1; bits++) {
    const mask = new Array(d).fill(0);
    for (let j = 0; j < d; j++) if (bits & (1 << j)) mask[j] = 1;
    masks.push(mask);
  }
  return masks;
}

function sampleMasks(d: number, numSamples: number, rng: Prng): number[][] {
  // stratified by coalition size with probability proportional to the kernel
  const sizeWeights: number[] = [];
  let totalWeight = 0;
  for (let s = 1; s < d; s++) {
    const w = (d - 1) / (s * (d - s));
    sizeWeights.push(w);
    totalWeight += w;
  }
  const masks: number[][] = [];
  while (masks.length < numSamples) {
    let pick = rng.next() * totalWeight;
    let size = 1;
    for (let s = 1; s < d; s++) {
      pick -= sizeWeights[s - 1];
      if (pick <= 0) {
        size = s;
        break;
      }
    }
    const order = rng.shuffle([...Array(d).keys()]);
    const mask = new Array(d).fill(0);
    for (let k = 0; k < size; k++) mask[order[k]] = 1;
    masks.push(mask);
    // paired antithetic sample: the complement coalition
    if (masks.length < numSamples) {
      masks.push(mask.map((v) => 1 - v));
    }
  }
  return masks;
}

export class ShapExplainer {
  private background: number[];
  private fBg: number;
  private options: Required<ShapOptions>;

  constructor(private model: ProbModel, X: number[][], options: ShapOptions = {}) {
    const d = X[0].length;
    this.background = new Array(d).fill(0);
    for (const row of X) for (let j = 0; j < d; j++) this.background[j] += row[j] / X.length;
    this.fBg = model.predictProba([this.background])[0];
    this.options = {
      numSamples: options.numSamples ?? 2048,
      maxExactFeatures: options.maxExactFeatures ?? 12,
      seed: options.seed ?? 0,
    };
  }

  explainInstance(x: number[], seedOffset = 0): number[] {
    const d = x.length;
    const total = this.model.predictProba([x])[0] - this.fBg;
    if (d === 1) return [total];
    const exact = d <= this.options.maxExactFeatures;
    const rng = new Prng(this.options.seed + 101 * seedOffset);
    const masks = exact
      ? enumerateMasks(d)
      : sampleMasks(d, this.options.numSamples, rng);
    const rows = masks.map((mask) =>
      mask.map((m, j) => (m ? x[j] : this.background[j]))
    );
    const probs = this.model.predictProba(rows);
    const targets = probs.map((p) => p - this.fBg);
    const weights = masks.map((mask) => {
      const size = mask.reduce((acc, v) => acc + v, 0);
      return exact ? kernelWeight(d, size) : 1.0; // sampling already follows the kernel
    });
    return solveShapley(masks, targets, weights, total, d);
  }
}
