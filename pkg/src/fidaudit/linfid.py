"""Non-separable disparity on linear regression coefficients.

The importance of feature j for a soft subgroup w = sigma(S theta) is the
j-th coefficient of the ridge-regularized weighted least squares fit under
weights w. The optimizer descends

    objective(theta) = lambda_coef * (+/-) beta_j(w(theta)) + lambda_size * P_size(w(theta))

with ADAM, differentiating through the linear solve: with
A = X'WX + eps I and beta = A^{-1} X'Wy,

    d beta_j / d w_i = (x_i . u) (y_i - x_i . beta),   u = A^{-1} e_j,

which follows from differentiating the normal equations in each weight.
The objective is non-convex in theta, so results are local: acceptance is a
non-increasing objective plus the size constraint, never global optimality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import EmptyGroupError, NonFiniteObjectiveError
from .models import DEFAULT_RIDGE_EPS, fit_wls, sigmoid
from .separable import DIRECTIONS, AuditResult
from .subgroup import SoftGroup

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
PLATEAU_TOL = 1e-9
PLATEAU_WINDOW = 50


@dataclass
class LinFidConfig:
    target_feature: int
    alpha_lo: float
    alpha_hi: float
    direction: str = "minimize"
    lambda_size: float = 1e5
    lambda_coef: float = 1e-1
    ridge_eps: float = DEFAULT_RIDGE_EPS
    lr: float = 0.05
    max_iters: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.lambda_size <= 0 or self.lr <= 0:
            raise ValueError("lambda_size and lr must be positive")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")


def lin_fid(ds: Dataset, j: int, w, eps: float = DEFAULT_RIDGE_EPS) -> float:
    """|coefficient_j on the weighted subgroup - coefficient_j on everyone|."""
    w = np.asarray(w, dtype=float)
    if w.sum() <= 0:
        raise EmptyGroupError("subgroup weights sum to zero")
    X = ds.feature_matrix
    theta_g = fit_wls(X, ds.labels, w, eps=eps).theta
    theta_r = fit_wls(X, ds.labels, None, eps=eps).theta
    return float(abs(theta_g[j] - theta_r[j]))


def size_penalty(w, alpha_lo: float, alpha_hi: float) -> float:
    """Two-sided hinge on the fractional subgroup size."""
    size = float(np.mean(np.asarray(w, dtype=float)))
    return max(alpha_lo - size, 0.0) + max(size - alpha_hi, 0.0)


def _coef_and_weight_grad(X, y, w, j: int, eps: float):
    """Coefficient beta_j and its gradient in the weights."""
    d = X.shape[1]
    A = X.T @ (w[:, None] * X) + eps * np.eye(d)
    b = X.T @ (w * y)
    beta = np.linalg.solve(A, b)
    u = np.linalg.solve(A, np.eye(d)[j])
    dbeta_j = (X @ u) * (y - X @ beta)
    return float(beta[j]), dbeta_j


def linfid_objective(ds: Dataset, cfg: LinFidConfig, theta) -> float:
    theta = np.asarray(theta, dtype=float)
    w = sigmoid(ds.sensitive_matrix @ theta)
    sign = -1.0 if cfg.direction == "maximize" else 1.0
    X = ds.feature_matrix
    d = X.shape[1]
    A = X.T @ (w[:, None] * X) + cfg.ridge_eps * np.eye(d)
    b = X.T @ (w * ds.labels)
    beta_j = float(np.linalg.solve(A, b)[cfg.target_feature])
    return cfg.lambda_coef * sign * beta_j + cfg.lambda_size * size_penalty(
        w, cfg.alpha_lo, cfg.alpha_hi
    )


def linfid_gradient(ds: Dataset, cfg: LinFidConfig, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    S = ds.sensitive_matrix
    w = sigmoid(S @ theta)
    n = w.shape[0]
    sign = -1.0 if cfg.direction == "maximize" else 1.0
    _, dbeta_j = _coef_and_weight_grad(
        ds.feature_matrix, ds.labels, w, cfg.target_feature, cfg.ridge_eps
    )
    size = float(w.mean())
    dpen = 0.0
    if size < cfg.alpha_lo:
        dpen = -1.0 / n
    elif size > cfg.alpha_hi:
        dpen = 1.0 / n
    dobj_dw = cfg.lambda_coef * sign * dbeta_j + cfg.lambda_size * dpen
    return S.T @ (dobj_dw * w * (1.0 - w))


def linfid_gradient_check(ds: Dataset, cfg: LinFidConfig, theta, h: float = 1e-5) -> float:
    """Max relative disagreement between analytic and central-difference grads."""
    theta = np.asarray(theta, dtype=float)
    analytic = linfid_gradient(ds, cfg, theta)
    fd = np.zeros_like(analytic)
    for k in range(theta.shape[0]):
        up, down = theta.copy(), theta.copy()
        up[k] += h
        down[k] -= h
        fd[k] = (linfid_objective(ds, cfg, up) - linfid_objective(ds, cfg, down)) / (2 * h)
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(fd)), 1e-12)
    return float(np.max(np.abs(analytic - fd)) / scale)


def _evaluate(ds: Dataset, j: int, w, eps: float):
    """(disparity, subgroup coefficient, population coefficient)."""
    X = ds.feature_matrix
    theta_g = fit_wls(X, ds.labels, w, eps=eps).theta
    theta_r = fit_wls(X, ds.labels, None, eps=eps).theta
    return float(abs(theta_g[j] - theta_r[j])), float(theta_g[j]), float(theta_r[j])


def optimize_linfid(
    ds: Dataset,
    cfg: LinFidConfig,
    ds_test: Dataset | None = None,
    hard_eval: bool = False,
) -> AuditResult:
    """ADAM descent on the penalized coefficient objective.

    Runs at most cfg.max_iters iterations, stopping early once the objective
    plateaus. Final evaluation fits the weighted regression with the soft
    membership weights on train (and test when given); ``hard_eval``
    thresholds membership at 0.5 first.
    """
    rng = np.random.default_rng(cfg.seed)
    theta = rng.normal(0.0, 0.01, size=ds.d_sens)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    j = cfg.target_feature
    trace: list[dict] = []
    best_obj = np.inf
    best_obj_iter = 0
    best_theta = theta.copy()
    t = 0
    for t in range(1, cfg.max_iters + 1):
        obj = linfid_objective(ds, cfg, theta)
        if not np.isfinite(obj):
            raise NonFiniteObjectiveError(f"objective became non-finite at iteration {t}", trace)
        w = sigmoid(ds.sensitive_matrix @ theta)
        A = ds.feature_matrix
        coef = float(
            np.linalg.solve(
                A.T @ (w[:, None] * A) + cfg.ridge_eps * np.eye(A.shape[1]),
                A.T @ (w * ds.labels),
            )[j]
        )
        trace.append({"t": t, "objective": obj, "size": float(w.mean()), "coefficient": coef})
        if obj < best_obj - PLATEAU_TOL:
            best_obj = obj
            best_obj_iter = t
            best_theta = theta.copy()
        elif t - best_obj_iter >= PLATEAU_WINDOW:
            break
        grad = linfid_gradient(ds, cfg, theta)
        m = ADAM_BETA1 * m + (1 - ADAM_BETA1) * grad
        v = ADAM_BETA2 * v + (1 - ADAM_BETA2) * grad * grad
        m_hat = m / (1 - ADAM_BETA1**t)
        v_hat = v / (1 - ADAM_BETA2**t)
        theta = theta - cfg.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)

    # report the best iterate seen, not wherever the last step landed
    group = SoftGroup(theta=best_theta)
    w = group.membership(ds.sensitive_matrix)
    w_eval = (w >= 0.5).astype(float) if hard_eval else w
    size = float(w.mean())
    disparity, coef_g, coef_r = _evaluate(ds, j, w_eval, cfg.ridge_eps)
    result = AuditResult(
        feature=j,
        feature_name=ds.feature_names[j],
        notion="LR",
        direction=cfg.direction,
        alpha_lo=cfg.alpha_lo,
        alpha_hi=cfg.alpha_hi,
        group=group,
        fid_train=disparity,
        avg_fid_train=disparity,
        signed_avg_fid_train=coef_g - coef_r,
        group_mean_train=coef_g,
        population_mean_train=coef_r,
        size_train=size,
        iterations_used=t,
        converged=cfg.alpha_lo <= size <= cfg.alpha_hi,
        trace=trace,
    )
    if ds_test is not None:
        wt = group.membership(ds_test.sensitive_matrix)
        wt_eval = (wt >= 0.5).astype(float) if hard_eval else wt
        disp_t, coef_g_t, coef_r_t = _evaluate(ds_test, j, wt_eval, cfg.ridge_eps)
        result.fid_test = disp_t
        result.avg_fid_test = disp_t
        result.signed_avg_fid_test = coef_g_t - coef_r_t
        result.group_mean_test = coef_g_t
        result.population_mean_test = coef_r_t
        result.size_test = float(wt.mean())
    return result


def linfid_audit(
    ds: Dataset,
    j: int,
    alpha_lo: float,
    alpha_hi: float,
    ds_test: Dataset | None = None,
    seed: int = 0,
    max_iters: int = 1000,
    hard_eval: bool = False,
    lambda_size: float = 1e5,
    lambda_coef: float = 1e-1,
) -> AuditResult:
    """Run both coefficient directions and keep the larger train disparity."""
    results = []
    for direction in DIRECTIONS:
        cfg = LinFidConfig(
            target_feature=j,
            alpha_lo=alpha_lo,
            alpha_hi=alpha_hi,
            direction=direction,
            seed=seed,
            max_iters=max_iters,
            lambda_size=lambda_size,
            lambda_coef=lambda_coef,
        )
        results.append(optimize_linfid(ds, cfg, ds_test=ds_test, hard_eval=hard_eval))
    a, b = results
    return a if a.fid_train >= b.fid_train else b
