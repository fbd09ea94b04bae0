"""Multinomial logistic regression and one-vs-rest linear SVM."""

from __future__ import annotations

import numpy as np

__all__ = ["softmax", "fit_logistic", "logistic_scores", "logistic_loss", "fit_linear_svm", "svm_scores"]


class DivergenceError(RuntimeError):
    pass


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def logistic_loss(W, b, X, Y, l2) -> float:
    z = X @ W + b
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-(Y * logp).sum() / len(X) + 0.5 * l2 * (W * W).sum())


def _gd_logistic(X, Y, learning_rate, iterations, l2):
    n, d = X.shape
    W = np.zeros((d, Y.shape[1]))
    b = np.zeros(Y.shape[1])
    losses = [logistic_loss(W, b, X, Y, l2)]
    for _ in range(iterations):
        R = softmax(X @ W + b) - Y
        W = W - learning_rate * (X.T @ R / n + l2 * W)
        b = b - learning_rate * R.mean(axis=0)
        losses.append(logistic_loss(W, b, X, Y, l2))
        if losses[-1] > losses[-2] + 1e-12 * max(1.0, abs(losses[-2])):
            return None, losses
    return (W, b), losses


def fit_logistic(X, y, n_classes, cfg, seed=None, jobs=1) -> dict:
    """Full-batch gradient descent on L2-regularized cross-entropy.

    Weights start at zero. If the loss ever rises, training restarts once
    with half the learning rate; a second rise raises ``DivergenceError``.
    """
    Y = np.eye(n_classes)[y]
    rate = cfg.learning_rate
    for _ in range(2):
        params, losses = _gd_logistic(X, Y, rate, cfg.iterations, cfg.l2)
        if params is not None:
            W, b = params
            return {"weights": W, "bias": b, "losses": np.array(losses)}
        rate /= 2
    raise DivergenceError("logistic-regression loss increased even at half learning rate")


def logistic_scores(params, X) -> np.ndarray:
    return softmax(X @ params["weights"] + params["bias"])


def _svm_objective(w, b, X, t, C):
    margins = t * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def _fit_binary_svm(X, t, C, epochs, learning_rate):
    """Subgradient descent on ``0.5|w|^2 + C * sum(hinge)``, best iterate kept.

    The objective is divided by ``C * n`` for stepping; the step at epoch
    ``e`` is ``learning_rate / sqrt(e)``.
    """
    n, d = X.shape
    lam = 1.0 / (C * n)
    w = np.zeros(d)
    b = 0.0
    best = (_svm_objective(w, b, X, t, C), w.copy(), b)
    for epoch in range(1, epochs + 1):
        viol = t * (X @ w + b) < 1.0
        gw = lam * w - (t[viol, None] * X[viol]).sum(axis=0) / n
        gb = -t[viol].sum() / n
        step = learning_rate / np.sqrt(epoch)
        w = w - step * gw
        b = b - step * gb
        obj = _svm_objective(w, b, X, t, C)
        if obj < best[0]:
            best = (obj, w.copy(), b)
    return best[1], best[2]


def fit_linear_svm(X, y, n_classes, cfg, seed=None, jobs=1) -> dict:
    W = np.zeros((X.shape[1], n_classes))
    bias = np.zeros(n_classes)
    for c in range(n_classes):
        t = np.where(y == c, 1.0, -1.0)
        W[:, c], bias[c] = _fit_binary_svm(X, t, cfg.C, cfg.epochs, cfg.learning_rate)
    return {"weights": W, "bias": bias}


def svm_scores(params, X) -> np.ndarray:
    return X @ params["weights"] + params["bias"]
