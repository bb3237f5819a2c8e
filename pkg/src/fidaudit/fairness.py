"""Standard fairness metrics on a subgroup relative to the full dataset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyGroupError


@dataclass
class FairnessReport:
    pos_rate_delta: float
    tpr_delta: float | None
    fpr_delta: float | None
    ece_delta: float
    group_size: float
    n_group: int

    def to_json_dict(self) -> dict:
        return {
            "pos_rate_delta": self.pos_rate_delta,
            "tpr_delta": self.tpr_delta,
            "fpr_delta": self.fpr_delta,
            "ece_delta": self.ece_delta,
            "group_size": self.group_size,
            "n_group": self.n_group,
        }


def _rates(probs, labels, threshold):
    pred = probs >= threshold
    pos_rate = float(np.mean(pred))
    pos = labels == 1
    neg = labels == 0
    tpr = float(np.mean(pred[pos])) if pos.any() else None
    fpr = float(np.mean(pred[neg])) if neg.any() else None
    return pos_rate, tpr, fpr


def ece(probs, labels, bins: int = 10) -> float:
    """Expected calibration error with equal-width probability bins.

    Per bin, compares the mean predicted probability against the observed
    positive rate, weighted by bin occupancy.
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels, dtype=float)
    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.clip(np.digitize(probs, edges[1:-1]), 0, bins - 1)
    total = 0.0
    n = probs.shape[0]
    for b in range(bins):
        in_bin = idx == b
        n_b = int(in_bin.sum())
        if n_b == 0:
            continue
        conf = float(probs[in_bin].mean())
        acc = float(labels[in_bin].mean())
        total += (n_b / n) * abs(acc - conf)
    return total


def fairness_deltas(
    probs, labels, w, threshold: float = 0.5, bins: int = 10
) -> FairnessReport:
    """Metric on the subgroup minus the metric on everyone.

    ``w`` must be hard membership; soft memberships should be thresholded at
    0.5 before calling. Missing rates (a group without positives, say) come
    back as None rather than 0.
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels, dtype=float)
    w = np.asarray(w, dtype=float)
    member = w > 0.5
    n_group = int(member.sum())
    if n_group == 0:
        raise EmptyGroupError("fairness deltas need a nonempty subgroup")

    pos_all, tpr_all, fpr_all = _rates(probs, labels, threshold)
    pos_g, tpr_g, fpr_g = _rates(probs[member], labels[member], threshold)
    ece_all = ece(probs, labels, bins)
    ece_g = ece(probs[member], labels[member], bins)

    return FairnessReport(
        pos_rate_delta=pos_g - pos_all,
        tpr_delta=None if tpr_g is None or tpr_all is None else tpr_g - tpr_all,
        fpr_delta=None if fpr_g is None or fpr_all is None else fpr_g - fpr_all,
        ece_delta=ece_g - ece_all,
        group_size=float(member.mean()),
        n_group=n_group,
    )
