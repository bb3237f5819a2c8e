"""Rich subgroups as linear functions over the sensitive features.

A hard group includes a point when theta . x > 0 (strict, so ties are
non-members and theta = 0 is the empty group). A soft group uses sigmoid
membership. Both operate on the sensitive matrix, whose last column is the
constant bias.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyGroupError
from .importance import ImportanceMatrix
from .models import sigmoid


@dataclass(frozen=True)
class ThresholdGroup:
    theta: np.ndarray

    def membership(self, S) -> np.ndarray:
        S = np.asarray(S, dtype=float)
        if S.shape[1] != self.theta.shape[0]:
            raise DimensionMismatchError(
                f"group has {self.theta.shape[0]} coefficients, matrix has {S.shape[1]} columns"
            )
        return (S @ self.theta > 0).astype(float)

    def to_json_dict(self, sensitive_feature_names=None) -> dict:
        return {
            "theta": [float(t) for t in self.theta],
            "kind": "hard",
            "sensitive_feature_names": list(sensitive_feature_names or []),
        }


@dataclass(frozen=True)
class SoftGroup:
    theta: np.ndarray

    def membership(self, S) -> np.ndarray:
        S = np.asarray(S, dtype=float)
        if S.shape[1] != self.theta.shape[0]:
            raise DimensionMismatchError(
                f"group has {self.theta.shape[0]} coefficients, matrix has {S.shape[1]} columns"
            )
        return sigmoid(S @ self.theta)

    def hardened(self) -> ThresholdGroup:
        """Hard counterpart: sigma(z) >= 0.5 iff z >= 0 (strict > kept)."""
        return ThresholdGroup(theta=np.asarray(self.theta, dtype=float))

    def to_json_dict(self, sensitive_feature_names=None) -> dict:
        return {
            "theta": [float(t) for t in self.theta],
            "kind": "soft",
            "sensitive_feature_names": list(sensitive_feature_names or []),
        }


def group_from_json_dict(doc: dict):
    theta = np.asarray(doc["theta"], dtype=float)
    kind = doc.get("kind", "hard")
    if kind == "soft":
        return SoftGroup(theta=theta)
    if kind == "hard":
        return ThresholdGroup(theta=theta)
    raise ValueError(f"unknown subgroup kind {kind!r}")


def load_group(path):
    with open(path, encoding="utf-8") as fh:
        return group_from_json_dict(json.load(fh))


@dataclass
class GroupDistribution:
    """Distribution over hard threshold groups (the dual-averaged iterates)."""

    thetas: np.ndarray  # k x d_sens
    weights: np.ndarray  # k, nonnegative, summing to 1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("distribution weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("distribution weights must sum to a positive value")
        self.weights = w / total
        self.thetas = np.asarray(self.thetas, dtype=float)

    @classmethod
    def uniform(cls, thetas) -> "GroupDistribution":
        thetas = np.asarray(thetas, dtype=float)
        k = thetas.shape[0]
        return cls(thetas=thetas, weights=np.full(k, 1.0 / k))

    @property
    def members(self) -> list[tuple[ThresholdGroup, float]]:
        return [
            (ThresholdGroup(theta=t), float(w)) for t, w in zip(self.thetas, self.weights)
        ]

    def mean_membership(self, S) -> np.ndarray:
        """Per-point expected membership under the distribution (fractional)."""
        S = np.asarray(S, dtype=float)
        scores = S @ self.thetas.T  # n x k
        return (scores > 0).astype(float) @ self.weights

    def expected_fid(self, M: ImportanceMatrix, j: int, S) -> float:
        """E_{g ~ p}[ |sum_i g(x_i) C_i - sum_i C_i| ] for importance column j."""
        C = M.column(j)
        total = C.sum()
        scores = np.asarray(S, dtype=float) @ self.thetas.T
        fids = np.abs(C @ (scores > 0).astype(float) - total)
        return float(fids @ self.weights)


def membership(group, S) -> np.ndarray:
    return group.membership(S)


def group_size(w) -> float:
    """Size of a (possibly fractional) membership vector as a fraction of n."""
    return float(np.mean(np.asarray(w, dtype=float)))


def fid_value(M: ImportanceMatrix, j: int, w, allow_empty: bool = False):
    """Disparity of importance column j on the weighted group vs the dataset.

    Returns (fid, avg_fid) where fid compares importance sums and avg_fid
    compares the per-point means. An empty group raises unless
    ``allow_empty``, in which case avg_fid is NaN (fid is still defined).
    """
    C = M.column(j)
    w = np.asarray(w, dtype=float)
    if w.shape[0] != C.shape[0]:
        raise DimensionMismatchError(f"weights {w.shape} vs importance rows {C.shape}")
    total_w = w.sum()
    fid = float(abs(w @ C - C.sum()))
    if total_w == 0:
        if not allow_empty:
            raise EmptyGroupError("group has zero total membership; avg_fid undefined")
        return fid, float("nan")
    avg_fid = float(abs((w @ C) / total_w - C.mean()))
    return fid, avg_fid


def mean_disparity(M: ImportanceMatrix, j: int, w):
    """Signed (group mean, population mean, group mean - population mean)."""
    C = M.column(j)
    w = np.asarray(w, dtype=float)
    total_w = w.sum()
    pop = float(C.mean())
    if total_w == 0:
        return float("nan"), pop, float("nan")
    grp = float((w @ C) / total_w)
    return grp, pop, grp - pop
