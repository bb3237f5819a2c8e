/**
 * Random forest classifier: CART trees (gini impurity) grown on bootstrap
 * samples with sqrt(d) feature subsampling per split. Probabilities are the
 * forest average of leaf positive fractions.
 */

import { Prng } from "./prng.js";
import { ProbModel } from "./logistic.js";

interface TreeNode {
  feature?: number;
  threshold?: number;
  left?: TreeNode;
  right?: TreeNode;
  value?: number; // leaf positive fraction
}

export interface ForestOptions {
  numTrees?: number;
  maxDepth?: number;
  minSamplesSplit?: number;
  seed?: number;
}

function giniSplitGain(
  X: number[][],
  y: number[],
  indices: number[],
  feature: number,
  threshold: number
): { gain: number; left: number[]; right: number[] } {
  const left: number[] = [];
  const right: number[] = [];
  let leftPos = 0;
  let rightPos = 0;
  for (const i of indices) {
    if (X[i][feature] <= threshold) {
      left.push(i);
      leftPos += y[i];
    } else {
      right.push(i);
      rightPos += y[i];
    }
  }
  if (left.length === 0 || right.length === 0) {
    return { gain: -1, left, right };
  }
  const gini = (count: number, pos: number) => {
    const p = pos / count;
    return 1 - p * p - (1 - p) * (1 - p);
  };
  const total = indices.length;
  let parentPos = leftPos + rightPos;
  const parent = gini(total, parentPos);
  const weighted =
    (left.length / total) * gini(left.length, leftPos) +
    (right.length / total) * gini(right.length, rightPos);
  return { gain: parent - weighted, left, right };
}

function growTree(
  X: number[][],
  y: number[],
  indices: number[],
  depth: number,
  options: Required<ForestOptions>,
  rng: Prng
): TreeNode {
  const pos = indices.reduce((acc, i) => acc + y[i], 0);
  const leaf = (): TreeNode => ({ value: pos / indices.length });
  if (
    depth >= options.maxDepth ||
    indices.length < options.minSamplesSplit ||
    pos === 0 ||
    pos === indices.length
  ) {
    return leaf();
  }
  const d = X[0].length;
  const numFeatures = Math.max(1, Math.floor(Math.sqrt(d)));
  const candidates = rng.shuffle([...Array(d).keys()]).slice(0, numFeatures);
  let best = { gain: 0, feature: -1, threshold: 0, left: [] as number[], right: [] as number[] };
  for (const feature of candidates) {
    const values = [...new Set(indices.map((i) => X[i][feature]))].sort((a, b) => a - b);
    for (let k = 0; k + 1 < values.length; k++) {
      const threshold = (values[k] + values[k + 1]) / 2;
      const split = giniSplitGain(X, y, indices, feature, threshold);
      if (split.gain > best.gain) {
        best = { gain: split.gain, feature, threshold, left: split.left, right: split.right };
      }
    }
  }
  if (best.feature < 0 || best.gain <= 1e-12) return leaf();
  return {
    feature: best.feature,
    threshold: best.threshold,
    left: growTree(X, y, best.left, depth + 1, options, rng),
    right: growTree(X, y, best.right, depth + 1, options, rng),
  };
}

function treePredict(node: TreeNode, x: number[]): number {
  let current = node;
  while (current.value === undefined) {
    current = x[current.feature!] <= current.threshold! ? current.left! : current.right!;
  }
  return current.value;
}

export class RandomForest implements ProbModel {
  private trees: TreeNode[] = [];

  constructor(X: number[][], y: number[], options: ForestOptions = {}) {
    const opts: Required<ForestOptions> = {
      numTrees: options.numTrees ?? 50,
      maxDepth: options.maxDepth ?? 8,
      minSamplesSplit: options.minSamplesSplit ?? 5,
      seed: options.seed ?? 0,
    };
    const rng = new Prng(opts.seed);
    const n = X.length;
    for (let t = 0; t < opts.numTrees; t++) {
      const indices = Array.from({ length: n }, () => rng.int(n));
      this.trees.push(growTree(X, y, indices, 0, opts, rng));
    }
  }

  predictProba(rows: number[][]): number[] {
    return rows.map(
      (x) => this.trees.reduce((acc, tree) => acc + treePredict(tree, x), 0) / this.trees.length
    );
  }
}
