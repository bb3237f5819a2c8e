/**
 * Small dense linear algebra: ridge-regularized weighted least squares via
 * Gaussian elimination with partial pivoting. Sizes here are tiny (local
 * surrogate models), so an O(d^3) solve is plenty.
 */

export function solve(A: number[][], b: number[]): number[] {
  const n = A.length;
  const M: number[][] = A.map((row, i) => [...row, b[i]]);
  for (let col = 0; col < n; col++) {
    let pivot = col;
    for (let r = col + 1; r < n; r++) {
      if (Math.abs(M[r][col]) > Math.abs(M[pivot][col])) pivot = r;
    }
    if (Math.abs(M[pivot][col]) < 1e-300) {
      throw new Error("singular system");
    }
    [M[col], M[pivot]] = [M[pivot], M[col]];
    for (let r = 0; r < n; r++) {
      if (r === col) continue;
      const factor = M[r][col] / M[col][col];
      if (factor === 0) continue;
      for (let c = col; c <= n; c++) M[r][c] -= factor * M[col][c];
    }
  }
  return M.map((row, i) => row[n] / row[i]);
}

/**
 * argmin_beta sum_i w_i (beta . x_i - y_i)^2 + eps ||beta||^2.
 */
export function weightedRidge(
  X: number[][],
  y: number[],
  w: number[],
  eps: number
): number[] {
  const n = X.length;
  const d = X[0].length;
  const A: number[][] = Array.from({ length: d }, () => new Array(d).fill(0));
  const b = new Array(d).fill(0);
  for (let i = 0; i < n; i++) {
    const wi = w[i];
    if (wi === 0) continue;
    const xi = X[i];
    for (let p = 0; p < d; p++) {
      b[p] += wi * xi[p] * y[i];
      for (let q = p; q < d; q++) {
        A[p][q] += wi * xi[p] * xi[q];
      }
    }
  }
  for (let p = 0; p < d; p++) {
    for (let q = 0; q < p; q++) A[p][q] = A[q][p];
    A[p][p] += eps;
  }
  return solve(A, b);
}
