"""Confusion matrices, per-class metrics, ROC/AUC and split protocols."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np

__all__ = [
    "MultiClassCM",
    "BinaryCM",
    "ClassMetrics",
    "RocCurve",
    "FoldReport",
    "EvaluationReport",
    "METRIC_NAMES",
    "confusion",
    "binarize",
    "metrics",
    "roc",
    "roc_one_vs_rest",
    "split_holdout",
    "split_kfold",
    "derive_seed",
    "evaluate_split",
    "cross_validate",
    "holdout_evaluate",
    "write_roc_points",
]

METRIC_NAMES = ("accuracy", "precision", "sensitivity", "specificity", "fpr", "fnr")


@dataclass(frozen=True, eq=False)
class MultiClassCM:
    """Rows are actual classes, columns are predicted classes."""

    counts: np.ndarray

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class BinaryCM:
    tp: int
    fn: int
    fp: int
    tn: int


@dataclass(frozen=True)
class ClassMetrics:
    """Percentages. Metrics whose denominator is zero are 0 and listed in ``undefined``."""

    accuracy: float
    precision: float
    sensitivity: float
    specificity: float
    fpr: float
    fnr: float
    undefined: tuple = ()

    def values(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in METRIC_NAMES])


@dataclass(frozen=True, eq=False)
class RocCurve:
    points: np.ndarray  # (m, 2) columns fpr, tpr
    thresholds: np.ndarray
    auc: float

    @property
    def fpr(self):
        return self.points[:, 0]

    @property
    def tpr(self):
        return self.points[:, 1]


def confusion(labels_true, labels_pred, n: int) -> MultiClassCM:
    t = np.asarray(labels_true, dtype=np.int64)
    p = np.asarray(labels_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise ValueError("labels_true and labels_pred differ in length")
    if t.size and (min(t.min(), p.min()) < 0 or max(t.max(), p.max()) >= n):
        raise ValueError(f"labels must lie in [0, {n})")
    counts = np.bincount(t * n + p, minlength=n * n).reshape(n, n)
    return MultiClassCM(counts)


def binarize(cm: MultiClassCM, i: int) -> BinaryCM:
    """One-vs-rest counts for class ``i``."""
    b = np.asarray(cm.counts)
    if not 0 <= i < cm.n:
        raise ValueError(f"class index {i} out of range")
    tp = int(b[i, i])
    fn = int(b[i, :].sum() - tp)
    fp = int(b[:, i].sum() - tp)
    tn = int(b.sum() - tp - fn - fp)
    return BinaryCM(tp, fn, fp, tn)


def metrics(b: BinaryCM) -> ClassMetrics:
    undefined = []

    def pct(num, den, name):
        if den == 0:
            undefined.append(name)
            return 0.0
        return 100.0 * num / den

    total = b.tp + b.tn + b.fp + b.fn
    vals = dict(
        accuracy=pct(b.tp + b.tn, total, "accuracy"),
        precision=pct(b.tp, b.tp + b.fp, "precision"),
        sensitivity=pct(b.tp, b.fn + b.tp, "sensitivity"),
        specificity=pct(b.tn, b.fp + b.tn, "specificity"),
        fpr=pct(b.fp, b.fp + b.tn, "fpr"),
        fnr=pct(b.fn, b.fn + b.tp, "fnr"),
    )
    return ClassMetrics(**vals, undefined=tuple(undefined))


def roc(labels_true, scores) -> RocCurve:
    """ROC over descending distinct score thresholds; AUC by the trapezoid rule.

    Samples sharing a score enter together, so ties contribute a diagonal
    segment.
    """
    t = np.asarray(labels_true).astype(bool).ravel()
    s = np.asarray(scores, dtype=np.float64).ravel()
    if t.shape != s.shape:
        raise ValueError("labels and scores differ in length")
    n_pos = int(t.sum())
    n_neg = len(t) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both positive and negative samples")
    order = np.argsort(-s, kind="stable")
    s, t = s[order], t[order]
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), len(s) - 1]
    tps = np.cumsum(t)[last]
    fps = (last + 1) - tps
    fpr = np.r_[0.0, fps / n_neg]
    tpr = np.r_[0.0, tps / n_pos]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(np.column_stack([fpr, tpr]), np.r_[np.inf, s[last]], auc)


def roc_one_vs_rest(labels_true, score_matrix, n: int):
    """Per-class curves (``None`` where a class is absent or alone) and macro AUC."""
    y = np.asarray(labels_true, dtype=np.int64)
    S = np.asarray(score_matrix, dtype=np.float64)
    curves = []
    for c in range(n):
        pos = y == c
        curves.append(roc(pos, S[:, c]) if 0 < pos.sum() < len(y) else None)
    aucs = [c.auc for c in curves if c is not None]
    macro = float(np.mean(aucs)) if aucs else float("nan")
    return curves, macro


# --------------------------------------------------------------------------
# splitting

def _units(labels, groups):
    """Split units (single samples or groups) with their class."""
    labels = np.asarray(labels, dtype=np.int64)
    if groups is None:
        return [np.array([i]) for i in range(len(labels))], labels.copy()
    groups = np.asarray(groups)
    _, first, inverse = np.unique(groups, return_index=True, return_inverse=True)
    # units in order of first appearance
    order = np.argsort(first, kind="stable")
    members = [np.flatnonzero(inverse == g) for g in order]
    unit_labels = []
    for m in members:
        lab = np.unique(labels[m])
        if len(lab) != 1:
            raise ValueError(f"group {groups[m[0]]!r} mixes classes")
        unit_labels.append(lab[0])
    return members, np.array(unit_labels, dtype=np.int64)


def _name(c, class_names):
    return class_names[c] if class_names is not None else str(c)


def split_holdout(labels, fraction: float, seed: int = 0, groups=None, class_names=None):
    """Stratified holdout: each class keeps ``floor(fraction * size)`` units for training.

    Returns sorted ``(train_idx, test_idx)``.
    """
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    units, ulabels = _units(labels, groups)
    rng = np.random.default_rng([seed])
    train, test = [], []
    for c in np.unique(ulabels):
        idx = rng.permutation(np.flatnonzero(ulabels == c))
        n_train = int(np.floor(fraction * len(idx)))
        train.extend(units[i] for i in idx[:n_train])
        test.extend(units[i] for i in idx[n_train:])
    cat = lambda parts: np.sort(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)
    return cat(train), cat(test)


def split_kfold(labels, k: int, seed: int = 0, groups=None, class_names=None):
    """Stratified k folds; returns a list of sorted test-index arrays.

    Units are shuffled within each class, classes are laid end to end and
    dealt round-robin, so each class and the folds overall differ in size
    by at most one unit.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    units, ulabels = _units(labels, groups)
    if k > len(units):
        raise ValueError(f"k={k} exceeds the number of samples ({len(units)})")
    rng = np.random.default_rng([seed])
    dealt = []
    for c in np.unique(ulabels):
        idx = np.flatnonzero(ulabels == c)
        if len(idx) < k:
            raise ValueError(f"class {_name(c, class_names)!r} has {len(idx)} samples, fewer than k={k}")
        dealt.extend(rng.permutation(idx))
    folds = [[] for _ in range(k)]
    for pos, u in enumerate(dealt):
        folds[pos % k].append(units[u])
    return [np.sort(np.concatenate(f)) for f in folds]


def derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint32)[0])


# --------------------------------------------------------------------------
# reports

@dataclass(frozen=True, eq=False)
class FoldReport:
    confusion: MultiClassCM
    binary: tuple
    metrics: tuple
    roc: tuple
    macro_auc: float
    accuracy: float
    n_test: int

    def macro(self) -> np.ndarray:
        return np.mean([m.values() for m in self.metrics], axis=0)


@dataclass(eq=False)
class EvaluationReport:
    variant: str
    class_names: tuple
    protocol: dict
    seed: int
    folds: list = field(default_factory=list)

    @property
    def per_class(self) -> np.ndarray:
        """Fold-averaged metrics, shape ``(n_classes, 6)``."""
        return np.mean([[m.values() for m in f.metrics] for f in self.folds], axis=0)

    @property
    def macro(self) -> dict:
        return dict(zip(METRIC_NAMES, self.per_class.mean(axis=0).tolist()))

    @property
    def accuracy(self) -> float:
        """Fold-averaged overall accuracy (trace over total), in percent."""
        return float(np.mean([f.accuracy for f in self.folds]))

    @property
    def class_auc(self) -> list:
        out = []
        for c in range(len(self.class_names)):
            vals = [f.roc[c].auc for f in self.folds if f.roc[c] is not None]
            out.append(float(np.mean(vals)) if vals else None)
        return out

    @property
    def macro_auc(self) -> float:
        return float(np.nanmean([f.macro_auc for f in self.folds]))

    def to_dict(self) -> dict:
        fold_docs = []
        for f in self.folds:
            fold_docs.append({
                "n_test": f.n_test,
                "accuracy": f.accuracy,
                "macro_auc": f.macro_auc,
                "confusion": f.confusion.counts.tolist(),
                "classes": [
                    {
                        "name": name,
                        "binary": asdict(b),
                        "metrics": {k: getattr(m, k) for k in METRIC_NAMES},
                        "undefined": list(m.undefined),
                        "auc": None if r is None else r.auc,
                        "roc": None if r is None else r.points.tolist(),
                    }
                    for name, b, m, r in zip(self.class_names, f.binary, f.metrics, f.roc)
                ],
            })
        per_class = self.per_class
        return {
            "schema": "acnescope.evaluation/1",
            "variant": self.variant,
            "class_names": list(self.class_names),
            "protocol": self.protocol,
            "seed": self.seed,
            "accuracy": self.accuracy,
            "macro": self.macro,
            "macro_auc": self.macro_auc,
            "classes": [
                {"name": name, "metrics": dict(zip(METRIC_NAMES, per_class[c].tolist())),
                 "auc": self.class_auc[c]}
                for c, name in enumerate(self.class_names)
            ],
            "folds": fold_docs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _fold_report(y_true, scores, n) -> FoldReport:
    y_pred = np.argmax(scores, axis=1)
    cm = confusion(y_true, y_pred, n)
    binary = tuple(binarize(cm, i) for i in range(n))
    curves, macro_auc = roc_one_vs_rest(y_true, scores, n)
    acc = 100.0 * np.trace(cm.counts) / cm.total
    return FoldReport(cm, binary, tuple(metrics(b) for b in binary), tuple(curves), macro_auc, acc, len(y_true))


def evaluate_split(variant, data, train_idx, test_idx, cfg, jobs=1) -> FoldReport:
    from .classify import predict_scores, train

    model = train(variant, data.subset(train_idx), cfg, jobs=jobs)
    scores = predict_scores(model, data.vectors[test_idx])
    return _fold_report(data.labels[test_idx], scores, len(data.class_names))


def cross_validate(variant, data, k: int = 5, cfg=None, seed: int = 0, groups=None, jobs=1,
                   folds=None) -> EvaluationReport:
    """Train on k-1 folds, test on the held-out one, keep every fold report.

    Fold ``i`` trains with seed ``derive_seed(seed, i)``.
    """
    from .classify import TrainConfig

    cfg = cfg or TrainConfig()
    if folds is None:
        folds = split_kfold(data.labels, k, seed, groups, data.class_names)
    report = EvaluationReport(variant, data.class_names,
                              {"name": "kfold", "k": len(folds), "grouped": groups is not None}, seed)
    everything = np.arange(len(data))
    for i, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(everything, test_idx)
        fold_cfg = replace(cfg, seed=derive_seed(seed, i))
        report.folds.append(evaluate_split(variant, data, train_idx, test_idx, fold_cfg, jobs))
    return report


def holdout_evaluate(variant, data, fraction: float = 0.66, cfg=None, seed: int = 0,
                     groups=None, jobs=1) -> EvaluationReport:
    from .classify import TrainConfig

    cfg = cfg or TrainConfig()
    train_idx, test_idx = split_holdout(data.labels, fraction, seed, groups, data.class_names)
    report = EvaluationReport(variant, data.class_names,
                              {"name": "holdout", "fraction": fraction, "grouped": groups is not None}, seed)
    report.folds.append(evaluate_split(variant, data, train_idx, test_idx,
                                       replace(cfg, seed=derive_seed(seed, 0)), jobs))
    return report


def write_roc_points(report: EvaluationReport, path) -> None:
    """Delimited ROC points: ``fold,class,fpr,tpr``."""
    with open(os.fspath(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fold", "class", "fpr", "tpr"])
        for i, f in enumerate(report.folds):
            for name, r in zip(report.class_names, f.roc):
                if r is None:
                    continue
                for fpr, tpr in r.points:
                    w.writerow([i, name, repr(float(fpr)), repr(float(tpr))])
