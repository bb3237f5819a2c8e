"""Per-point local explanation matrices and their summary statistics.

The engine computes gradient saliency natively; LIME/SHAP style values are
ingested from files. Importance file contract: comma-separated, header equal
to the dataset's encoded feature names (an optional leading ``row_id`` column
must run 0..n-1), one real value per feature per row, rows aligned with the
dataset's row order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import AlignmentError, DimensionMismatchError
from .models import LogisticModel, predict_proba

NOTIONS = ("GRAD", "LIME", "SHAP", "EXTERNAL")


@dataclass
class ImportanceMatrix:
    values: np.ndarray  # n x d
    notion: str
    feature_names: list[str]

    @property
    def aligned_rows(self) -> int:
        return self.values.shape[0]

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def subset(self, indices) -> "ImportanceMatrix":
        idx = np.asarray(indices, dtype=int)
        return ImportanceMatrix(
            values=self.values[idx], notion=self.notion, feature_names=self.feature_names
        )


@dataclass
class ImportanceStats:
    mu_abs: np.ndarray  # per-feature mean absolute value
    mean: np.ndarray


def grad_saliency(model: LogisticModel, ds: Dataset) -> ImportanceMatrix:
    """Gradient of the positive-class probability at each point.

    For p = sigma(w.x + b) the gradient in x_j is p(1-p) w_j, so every row
    is the shared factor p(1-p) times the weight vector.
    """
    X = ds.feature_matrix
    if X.shape[1] != model.weights.shape[0]:
        raise DimensionMismatchError(
            f"model has {model.weights.shape[0]} features, dataset has {X.shape[1]}"
        )
    p = predict_proba(model, X)
    values = (p * (1.0 - p))[:, None] * model.weights[None, :]
    return ImportanceMatrix(values=values, notion="GRAD", feature_names=list(ds.feature_names))


def load_importance(path, ds: Dataset) -> ImportanceMatrix:
    """Load an externally produced importance file aligned with ``ds``."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise AlignmentError(f"{path}: empty importance file") from None
        header = [h.strip() for h in header]
        has_row_id = bool(header) and header[0] == "row_id"
        names = header[1:] if has_row_id else header
        if names != list(ds.feature_names):
            raise AlignmentError(
                f"{path}: header does not match dataset feature names "
                f"(expected {len(ds.feature_names)} columns, got {len(names)})"
            )
        rows = []
        for i, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                continue
            if has_row_id:
                if int(float(row[0])) != i:
                    raise AlignmentError(f"{path}: row_id {row[0]} at position {i}")
                row = row[1:]
            if len(row) != len(names):
                raise AlignmentError(f"{path}: row {i} has {len(row)} fields, want {len(names)}")
            rows.append([float(c) for c in row])
    values = np.asarray(rows, dtype=float)
    if values.shape[0] != ds.n:
        raise AlignmentError(f"{path}: {values.shape[0]} rows for a {ds.n}-row dataset")
    if not np.all(np.isfinite(values)):
        raise AlignmentError(f"{path}: non-finite importance entries")
    return ImportanceMatrix(values=values, notion="EXTERNAL", feature_names=list(ds.feature_names))


def write_importance(path, M: ImportanceMatrix) -> None:
    """Write a matrix in the importance file format (with row_id column)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_id"] + list(M.feature_names))
        for i in range(M.values.shape[0]):
            writer.writerow([i] + [repr(float(v)) for v in M.values[i]])


def importance_stats(M: ImportanceMatrix) -> ImportanceStats:
    return ImportanceStats(
        mu_abs=np.mean(np.abs(M.values), axis=0),
        mean=np.mean(M.values, axis=0),
    )
