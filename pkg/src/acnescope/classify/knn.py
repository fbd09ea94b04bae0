"""k-nearest-neighbour voting under the Manhattan metric."""

from __future__ import annotations

import numpy as np


def manhattan(a, b) -> np.ndarray:
    """Pairwise L1 distances between rows of ``a`` and rows of ``b``."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    return np.abs(a[:, None, :] - b[None, :, :]).sum(axis=2)


def fit_knn(X, y, n_classes, cfg, seed=None, jobs=1) -> dict:
    return {"points": np.array(X, dtype=np.float64), "labels": np.array(y, dtype=np.int64),
            "k": int(cfg.k), "n_classes": int(n_classes)}


def knn_scores(params, X, chunk: int = 256) -> np.ndarray:
    """Fraction of the ``k`` nearest training points voting for each class.

    Equidistant neighbours are ranked by training order.
    """
    pts, labels = params["points"], params["labels"]
    k = min(int(params["k"]), len(pts))
    n_classes = int(params["n_classes"])
    X = np.atleast_2d(X)
    out = np.zeros((len(X), n_classes))
    for s in range(0, len(X), chunk):
        d = manhattan(X[s:s + chunk], pts)
        nn = np.argsort(d, axis=1, kind="stable")[:, :k]
        for row, idx in enumerate(nn):
            out[s + row] = np.bincount(labels[idx], minlength=n_classes) / k
    return out
