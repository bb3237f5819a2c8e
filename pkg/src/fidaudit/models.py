"""Linear models used across the engine.

Logistic regression is the differentiable classifier behind gradient
saliency; ridge-regularized weighted least squares backs both the
cost-sensitive oracle's regressors and the linear-coefficient disparity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabelsError, DimensionMismatchError, SingularSystemError

DEFAULT_RIDGE_EPS = 1e-6


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    training_loss_trace: list[float] = field(default_factory=list)


@dataclass
class LinearCoefficients:
    theta: np.ndarray
    ridge_eps: float


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(X, y, w, b):
    z = X @ w + b
    # log(1 + exp(-z*y_pm)) computed stably via logaddexp
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def fit_logistic(X, y, lr: float = 0.1, epochs: int = 500, seed: int = 0) -> LogisticModel:
    """Full-batch gradient descent on the mean logistic loss.

    Descent runs on internally z-scored features (so raw column scales
    cannot blow up the step size and saturate the sigmoid); the returned
    weights and intercept are folded back into raw-feature units.
    Deterministic given the seed, which only controls the small random
    initialization. Raises if the labels contain a single class.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"X {X.shape} vs y {y.shape}")
    if X.shape[0] < 2 or len(np.unique(y)) < 2:
        raise DegenerateLabelsError("need at least two rows with both classes present")
    n, d = X.shape
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    Z = (X - mu) / sd
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 0.01, size=d)
    b = 0.0
    trace = []
    for _ in range(epochs):
        p = sigmoid(Z @ w + b)
        grad_w = Z.T @ (p - y) / n
        grad_b = float(np.mean(p - y))
        w -= lr * grad_w
        b -= lr * grad_b
        trace.append(logistic_loss(Z, y, w, b))
    raw_w = w / sd
    raw_b = b - float(raw_w @ mu)
    return LogisticModel(weights=raw_w, intercept=raw_b, training_loss_trace=trace)


def predict_proba(model: LogisticModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != model.weights.shape[0]:
        raise DimensionMismatchError(
            f"model has {model.weights.shape[0]} features, X has {X.shape[1]}"
        )
    return sigmoid(X @ model.weights + model.intercept)


def fit_wls(X, y, w=None, eps: float = DEFAULT_RIDGE_EPS) -> LinearCoefficients:
    """Solve the ridge-regularized weighted normal equations.

    Returns theta minimizing sum_i w_i (theta . x_i - y_i)^2 + eps ||theta||^2,
    via a dense solve of (X'WX + eps I) theta = X'Wy.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if w is None:
        w = np.ones(n)
    w = np.asarray(w, dtype=float)
    if w.shape[0] != n or y.shape[0] != n:
        raise DimensionMismatchError(f"X {X.shape}, y {y.shape}, w {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    A = X.T @ (w[:, None] * X) + eps * np.eye(d)
    b = X.T @ (w * y)
    try:
        theta = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "normal equations are singular; pass eps > 0 or check for zero weights"
        ) from exc
    if not np.all(np.isfinite(theta)):
        raise SingularSystemError("solver returned non-finite coefficients")
    return LinearCoefficients(theta=theta, ridge_eps=eps)
