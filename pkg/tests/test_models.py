import numpy as np
import pytest

from fidaudit.errors import DegenerateLabelsError, DimensionMismatchError, SingularSystemError
from fidaudit.models import fit_logistic, fit_wls, predict_proba, sigmoid


def gaussian_two_class(n=200, seed=0):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([
        rng.normal(-1.3, 1.0, size=(half, 2)),
        rng.normal(+1.3, 1.0, size=(half, 2)),
    ])
    y = np.concatenate([np.zeros(half), np.ones(half)])
    return X, y


def oracle_logistic_accuracy(X, y):
    """Independent check: scipy minimization of the same loss."""
    from scipy.optimize import minimize

    def loss(params):
        w, b = params[:-1], params[-1]
        z = X @ w + b
        return float(np.mean(np.logaddexp(0.0, z) - y * z))

    res = minimize(loss, np.zeros(X.shape[1] + 1), method="BFGS")
    w, b = res.x[:-1], res.x[-1]
    return float(np.mean((sigmoid(X @ w + b) >= 0.5) == y))


def test_separable_two_points_positive_weight():
    model = fit_logistic(np.array([[-1.0], [1.0]]), np.array([0.0, 1.0]))
    assert model.weights[0] > 0


def test_constant_labels_error():
    with pytest.raises(DegenerateLabelsError):
        fit_logistic(np.array([[0.0], [1.0]]), np.array([1.0, 1.0]))


def test_logistic_matches_oracle_on_gaussian_fixture():
    X, y = gaussian_two_class()
    model = fit_logistic(X, y, seed=0)
    acc = float(np.mean((predict_proba(model, X) >= 0.5) == y))
    assert acc >= 0.9
    assert oracle_logistic_accuracy(X, y) >= 0.9


def test_logistic_deterministic_and_loss_decreases():
    X, y = gaussian_two_class(seed=3)
    m1 = fit_logistic(X, y, seed=7)
    m2 = fit_logistic(X, y, seed=7)
    np.testing.assert_array_equal(m1.weights, m2.weights)
    trace = np.asarray(m1.training_loss_trace)
    smoothed = np.convolve(trace, np.ones(10) / 10, mode="valid")
    assert np.all(np.diff(smoothed) <= 1e-9)


def test_logistic_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(5, 2))
    y = np.array([0.0, 1.0, 1.0, 0.0, 1.0])
    w = rng.normal(size=2)
    b = 0.3
    n = X.shape[0]
    p = sigmoid(X @ w + b)
    analytic = X.T @ (p - y) / n

    def loss(wv):
        z = X @ wv + b
        return float(np.mean(np.logaddexp(0.0, z) - y * z))

    h = 1e-6
    for k in range(2):
        up, down = w.copy(), w.copy()
        up[k] += h
        down[k] -= h
        fd = (loss(up) - loss(down)) / (2 * h)
        assert abs(fd - analytic[k]) <= 1e-5


def test_predict_proba_analytic_values():
    from fidaudit.models import LogisticModel

    model = LogisticModel(weights=np.zeros(2), intercept=0.0)
    np.testing.assert_allclose(predict_proba(model, np.eye(2)), [0.5, 0.5])

    model = LogisticModel(weights=np.array([1.0]), intercept=0.0)
    assert predict_proba(model, np.array([[0.0]]))[0] == 0.5
    assert predict_proba(model, np.array([[30.0]]))[0] > 1 - 1e-9

    # monotone in the intercept
    p = [
        predict_proba(LogisticModel(weights=np.array([1.0]), intercept=b), np.array([[0.2]]))[0]
        for b in (-2.0, 0.0, 2.0, 5.0)
    ]
    assert all(a < b for a, b in zip(p, p[1:]))

    with pytest.raises(DimensionMismatchError):
        predict_proba(LogisticModel(weights=np.ones(3), intercept=0.0), np.eye(2))


def test_wls_exact_fit_and_weight_zeroing():
    theta = fit_wls(np.array([[1.0], [2.0]]), np.array([2.0, 4.0]), eps=0.0).theta
    np.testing.assert_allclose(theta, [2.0], atol=1e-12)

    theta = fit_wls(
        np.array([[1.0], [2.0]]), np.array([2.0, 100.0]), w=np.array([1.0, 0.0]), eps=0.0
    ).theta
    np.testing.assert_allclose(theta, [2.0], atol=1e-12)


def test_wls_matches_normal_equation_oracle():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(50, 5))
    y = rng.normal(size=50)
    w = rng.uniform(0.1, 2.0, size=50)
    eps = 1e-6
    theta = fit_wls(X, y, w, eps=eps).theta
    oracle = np.linalg.inv(X.T @ (w[:, None] * X) + eps * np.eye(5)) @ (X.T @ (w * y))
    rel = np.max(np.abs(theta - oracle)) / max(1.0, np.max(np.abs(oracle)))
    assert rel <= 1e-8


def test_wls_optimality_gradient_norm():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(40, 4))
    y = rng.normal(size=40)
    w = rng.uniform(0.0, 1.0, size=40)
    eps = 1e-6
    theta = fit_wls(X, y, w, eps=eps).theta
    grad = 2 * (X.T @ (w * (X @ theta - y)) + eps * theta)
    bound = 1e-8 * (1 + np.max(np.abs(X.T @ (w * y))))
    assert np.max(np.abs(grad)) <= bound


def test_wls_weight_scaling_invariance_without_ridge():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(30, 3))
    y = rng.normal(size=30)
    w = rng.uniform(0.5, 1.5, size=30)
    t1 = fit_wls(X, y, w, eps=0.0).theta
    t2 = fit_wls(X, y, 7.3 * w, eps=0.0).theta
    np.testing.assert_allclose(t1, t2, atol=1e-10)


def test_wls_singular_system_raises():
    with pytest.raises(SingularSystemError):
        fit_wls(np.array([[1.0], [2.0]]), np.array([1.0, 2.0]), w=np.zeros(2), eps=0.0)
