"""Cost-sensitive classification oracle over linear threshold subgroups.

The oracle fits one ridge regressor per label cost over the sensitive
features and thresholds their difference: picking label 1 exactly where the
predicted cost of 0 exceeds the predicted cost of 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .models import DEFAULT_RIDGE_EPS, fit_wls
from .subgroup import ThresholdGroup


@dataclass
class CostPair:
    c0: np.ndarray
    c1: np.ndarray


def csc_best_response(S, costs: CostPair, eps: float = DEFAULT_RIDGE_EPS) -> ThresholdGroup:
    """Return the threshold group minimizing total assignment cost (heuristic).

    Ridge (rather than plain least squares) keeps collinear one-hot blocks
    from blowing up the fits without changing the thresholded difference
    in any meaningful way.
    """
    S = np.asarray(S, dtype=float)
    c0 = np.asarray(costs.c0, dtype=float)
    c1 = np.asarray(costs.c1, dtype=float)
    if c0.shape[0] != S.shape[0] or c1.shape[0] != S.shape[0]:
        raise DimensionMismatchError(f"S has {S.shape[0]} rows, costs {c0.shape}/{c1.shape}")
    r0 = fit_wls(S, c0, eps=eps)
    r1 = fit_wls(S, c1, eps=eps)
    return ThresholdGroup(theta=r0.theta - r1.theta)
