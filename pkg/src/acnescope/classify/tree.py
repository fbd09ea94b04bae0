"""CART decision trees and random forests."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

__all__ = ["build_tree", "tree_proba", "fit_decision_tree", "tree_scores", "fit_random_forest", "forest_scores"]

_TIE = 1e-12


def _impurity(counts_left, counts_right, criterion):
    """Size-weighted child impurity for every candidate split (rows)."""
    nl = counts_left.sum(axis=1)
    nr = counts_right.sum(axis=1)
    if criterion == "gini":
        sl = (counts_left ** 2).sum(axis=1) / nl
        sr = (counts_right ** 2).sum(axis=1) / nr
        return (nl + nr) - (sl + sr)
    with np.errstate(divide="ignore", invalid="ignore"):
        pl = counts_left / nl[:, None]
        pr = counts_right / nr[:, None]
        hl = -np.where(pl > 0, pl * np.log2(pl), 0.0).sum(axis=1)
        hr = -np.where(pr > 0, pr * np.log2(pr), 0.0).sum(axis=1)
    return nl * hl + nr * hr


def _best_split(X, onehot, features, criterion):
    """Lowest-impurity split; ties go to the lowest feature, then lowest threshold."""
    total = onehot.sum(axis=0)
    candidates = []
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        valid = np.flatnonzero(xs[:-1] < xs[1:])
        if len(valid) == 0:
            continue
        left = np.cumsum(onehot[order], axis=0)[valid]
        imp = _impurity(left, total - left, criterion)
        candidates.append((f, xs, valid, imp))
    if not candidates:
        return None
    best = min(c[3].min() for c in candidates)
    for f, xs, valid, imp in candidates:
        hits = np.flatnonzero(imp <= best + _TIE * max(1.0, abs(best)))
        if len(hits):
            p = valid[hits[0]]
            thr = 0.5 * (xs[p] + xs[p + 1])
            if not xs[p] <= thr < xs[p + 1]:
                thr = xs[p]
            return int(f), float(thr)
    return None


def build_tree(X, y, n_classes, criterion="gini", min_split=2, max_depth=None,
               max_features=None, rng=None) -> dict:
    """Grow a CART tree.

    Nodes split until pure, smaller than ``min_split``, at ``max_depth``, or
    with every feature constant. With ``max_features`` set, each split draws
    that many candidates from the node's non-constant features using ``rng``.
    Leaves store class frequencies.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    onehot = np.eye(n_classes)[y]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts = onehot[idx].sum(axis=0)
        value.append(counts / counts.sum())
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if len(idx) < min_split or (max_depth is not None and depth >= max_depth):
            continue
        if np.count_nonzero(onehot[idx].sum(axis=0)) < 2:
            continue
        Xn = X[idx]
        nonconst = np.flatnonzero(Xn.min(axis=0) < Xn.max(axis=0))
        if len(nonconst) == 0:
            continue
        if max_features is not None and len(nonconst) > max_features:
            nonconst = np.sort(rng.choice(nonconst, size=max_features, replace=False))
        split = _best_split(Xn, onehot[idx], nonconst, criterion)
        if split is None:
            continue
        f, thr = split
        go_left = Xn[:, f] <= thr
        feature[node] = f
        threshold[node] = thr
        li, ri = idx[go_left], idx[~go_left]
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # right first so the left subtree is expanded first
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold, dtype=np.float64),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.array(value, dtype=np.float64),
    }


def tree_proba(tree, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    node = np.zeros(len(X), dtype=np.int64)
    rows = np.arange(len(X))
    while True:
        f = tree["feature"][node]
        internal = f >= 0
        if not internal.any():
            break
        r = rows[internal]
        n = node[internal]
        go_left = X[r, f[internal]] <= tree["threshold"][n]
        node[internal] = np.where(go_left, tree["left"][n], tree["right"][n])
    return tree["value"][node]


def fit_decision_tree(X, y, n_classes, cfg, seed=None, jobs=1) -> dict:
    return build_tree(X, y, n_classes, cfg.criterion, cfg.min_split, cfg.max_depth)


def tree_scores(params, X) -> np.ndarray:
    return tree_proba(params, X)


def _grow_member(args):
    X, y, n_classes, cfg, seed, t = args
    rng = np.random.default_rng([seed, t])
    n, d = X.shape
    if cfg.bootstrap:
        m = max(1, int(round(cfg.bag_fraction * n)))
        idx = rng.integers(0, n, size=m)
    else:
        idx = np.arange(n)
    m_try = cfg.features_per_split or max(1, int(math.isqrt(d)))
    return build_tree(X[idx], y[idx], n_classes, cfg.criterion, cfg.min_split,
                      cfg.max_depth, min(m_try, d), rng)


def fit_random_forest(X, y, n_classes, cfg, seed=0, jobs=1) -> dict:
    """Bagged CART trees; tree ``t`` draws from a generator seeded by ``(seed, t)``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    tasks = [(X, y, n_classes, cfg, int(seed), t) for t in range(cfg.n_trees)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            trees = list(ex.map(_grow_member, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        trees = [_grow_member(t) for t in tasks]
    return _pack_forest(trees, n_classes)


def _pack_forest(trees, n_classes) -> dict:
    sizes = np.array([len(t["feature"]) for t in trees], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    cat = {k: np.concatenate([t[k] for t in trees]) for k in ("feature", "threshold", "left", "right", "value")}
    return {"offsets": offsets, "sizes": sizes, "n_classes": int(n_classes), **cat}


def _unpack_tree(forest, t):
    s, n = forest["offsets"][t], forest["sizes"][t]
    return {k: forest[k][s:s + n] for k in ("feature", "threshold", "left", "right", "value")}


def forest_scores(params, X) -> np.ndarray:
    """Fraction of trees voting for each class."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n_classes = int(params["n_classes"])
    votes = np.zeros((len(X), n_classes))
    n_trees = len(params["sizes"])
    for t in range(n_trees):
        pred = np.argmax(tree_proba(_unpack_tree(params, t), X), axis=1)
        votes[np.arange(len(X)), pred] += 1
    return votes / n_trees
