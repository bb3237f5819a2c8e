/**
 * Full-batch gradient-descent logistic regression; the differentiable model
 * option for explanation targets.
 */

import { Prng } from "./prng.js";

export interface ProbModel {
  predictProba(rows: number[][]): number[];
}

function sigmoid(z: number): number {
  if (z >= 0) return 1 / (1 + Math.exp(-z));
  const e = Math.exp(z);
  return e / (1 + e);
}

export class LogisticModel implements ProbModel {
  constructor(public weights: number[], public intercept: number) {}

  predictProba(rows: number[][]): number[] {
    return rows.map((x) => {
      let z = this.intercept;
      for (let j = 0; j < x.length; j++) z += this.weights[j] * x[j];
      return sigmoid(z);
    });
  }
}

export function fitLogistic(
  X: number[][],
  y: number[],
  options: { lr?: number; epochs?: number; seed?: number } = {}
): LogisticModel {
  const { lr = 0.1, epochs = 500, seed = 0 } = options;
  const n = X.length;
  const d = X[0].length;
  const classes = new Set(y);
  if (n < 2 || classes.size < 2) {
    throw new Error("need at least two rows with both classes present");
  }
  const rng = new Prng(seed);
  const w = Array.from({ length: d }, () => rng.normal() * 0.01);
  let b = 0;
  for (let epoch = 0; epoch < epochs; epoch++) {
    const gradW = new Array(d).fill(0);
    let gradB = 0;
    for (let i = 0; i < n; i++) {
      let z = b;
      for (let j = 0; j < d; j++) z += w[j] * X[i][j];
      const diff = sigmoid(z) - y[i];
      for (let j = 0; j < d; j++) gradW[j] += diff * X[i][j];
      gradB += diff;
    }
    for (let j = 0; j < d; j++) w[j] -= (lr * gradW[j]) / n;
    b -= (lr * gradB) / n;
  }
  return new LogisticModel(w, b);
}
