"""Five classical classifiers behind a common train / predict interface."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..features import FeatureVector, Normalizer, fit_normalizer
from . import persist
from .knn import fit_knn, knn_scores, manhattan
from .linear import fit_linear_svm, fit_logistic, logistic_scores, svm_scores
from .persist import ModelFormatError, ModelVersionError
from .tree import fit_decision_tree, fit_random_forest, forest_scores, tree_scores

__all__ = [
    "VARIANTS",
    "LRConfig",
    "SVMConfig",
    "KNNConfig",
    "DTConfig",
    "RFConfig",
    "TrainConfig",
    "LabeledSet",
    "TrainedModel",
    "train",
    "predict",
    "predict_scores",
    "save_model",
    "load_model",
    "manhattan",
    "ModelFormatError",
    "ModelVersionError",
]

VARIANTS = ("LR", "SVM", "KNN", "DT", "RF")


@dataclass(frozen=True)
class LRConfig:
    learning_rate: float = 0.1
    iterations: int = 500
    l2: float = 1e-4


@dataclass(frozen=True)
class SVMConfig:
    C: float = 55.0
    epochs: int = 200
    learning_rate: float = 1.0


@dataclass(frozen=True)
class KNNConfig:
    k: int = 7


@dataclass(frozen=True)
class DTConfig:
    criterion: str = "gini"
    min_split: int = 2
    max_depth: Optional[int] = None


@dataclass(frozen=True)
class RFConfig:
    n_trees: int = 100
    features_per_split: Optional[int] = None  # None: floor(sqrt(d))
    bag_fraction: float = 1.0
    bootstrap: bool = True
    criterion: str = "gini"
    min_split: int = 2
    max_depth: Optional[int] = None


@dataclass(frozen=True)
class TrainConfig:
    lr: LRConfig = field(default_factory=LRConfig)
    svm: SVMConfig = field(default_factory=SVMConfig)
    knn: KNNConfig = field(default_factory=KNNConfig)
    dt: DTConfig = field(default_factory=DTConfig)
    rf: RFConfig = field(default_factory=RFConfig)
    normalize: bool = True
    seed: int = 0

    def __post_init__(self):
        checks = [
            (self.lr.iterations >= 1, "lr.iterations must be >= 1"),
            (self.lr.learning_rate > 0, "lr.learning_rate must be > 0"),
            (self.svm.C > 0, "svm.C must be > 0"),
            (self.svm.epochs >= 1, "svm.epochs must be >= 1"),
            (self.knn.k >= 1, "knn.k must be >= 1"),
            (self.dt.min_split >= 2, "dt.min_split must be >= 2"),
            (self.rf.n_trees >= 1, "rf.n_trees must be >= 1"),
            (self.rf.min_split >= 2, "rf.min_split must be >= 2"),
            (0 < self.rf.bag_fraction, "rf.bag_fraction must be > 0"),
            (self.dt.criterion in ("gini", "entropy"), "dt.criterion must be gini or entropy"),
            (self.rf.criterion in ("gini", "entropy"), "rf.criterion must be gini or entropy"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)
        if self.knn.k % 2 == 0:
            warnings.warn("an even knn.k can produce tied votes", stacklevel=2)


@dataclass(frozen=True, eq=False)
class LabeledSet:
    vectors: np.ndarray
    labels: np.ndarray
    class_names: tuple

    def __post_init__(self):
        X = np.array([v.as_array() if isinstance(v, FeatureVector) else v for v in self.vectors],
                     dtype=np.float64)
        if X.size == 0:
            shape = np.shape(self.vectors)
            X = X.reshape(0, shape[1] if len(shape) == 2 else 0)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or len(X) != len(y):
            raise ValueError("vectors and labels must have equal lengths")
        if len(y) and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise ValueError("label outside class_names")
        object.__setattr__(self, "vectors", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __len__(self):
        return len(self.labels)

    def subset(self, idx) -> "LabeledSet":
        return LabeledSet(self.vectors[idx], self.labels[idx], self.class_names)

    def select_features(self, columns) -> "LabeledSet":
        return LabeledSet(self.vectors[:, list(columns)], self.labels, self.class_names)


@dataclass(frozen=True, eq=False)
class TrainedModel:
    variant: str
    params: dict
    normalizer: Optional[Normalizer]
    class_names: tuple
    seed: int
    n_features: int


_FIT = {
    "LR": (fit_logistic, "lr"),
    "SVM": (fit_linear_svm, "svm"),
    "KNN": (fit_knn, "knn"),
    "DT": (fit_decision_tree, "dt"),
    "RF": (fit_random_forest, "rf"),
}

_SCORE = {
    "LR": logistic_scores,
    "SVM": svm_scores,
    "KNN": knn_scores,
    "DT": tree_scores,
    "RF": forest_scores,
}


def train(variant: str, data: LabeledSet, cfg: TrainConfig = None, jobs: int = 1) -> TrainedModel:
    """Fit one of ``VARIANTS`` on ``data``.

    ``jobs`` only changes how random-forest trees are scheduled; the fitted
    model is identical for any value.
    """
    if variant not in _FIT:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    cfg = cfg or TrainConfig()
    if len(data) == 0:
        raise ValueError("empty training data")
    if len(np.unique(data.labels)) < 2:
        raise ValueError("training data must contain at least 2 classes")
    X = data.vectors
    normalizer = None
    if cfg.normalize:
        normalizer = fit_normalizer(X)
        X = normalizer.transform(X)
    fit, key = _FIT[variant]
    params = fit(X, data.labels, len(data.class_names), getattr(cfg, key), seed=cfg.seed, jobs=jobs)
    return TrainedModel(variant, params, normalizer, data.class_names, int(cfg.seed), X.shape[1])


def predict_scores(m: TrainedModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != m.n_features:
        raise ValueError(f"dimension mismatch: model expects {m.n_features} features, got {X.shape[1]}")
    if m.normalizer is not None:
        X = m.normalizer.transform(X)
    return _SCORE[m.variant](m.params, X)


def predict(m: TrainedModel, v):
    """Return ``(label_index, scores)``; ties in the scores go to the lowest class."""
    x = v.as_array() if isinstance(v, FeatureVector) else np.asarray(v, dtype=np.float64)
    scores = predict_scores(m, x.reshape(1, -1))[0]
    return int(np.argmax(scores)), scores


def _document(m: TrainedModel) -> dict:
    return {
        "variant": m.variant,
        "class_names": list(m.class_names),
        "seed": m.seed,
        "n_features": m.n_features,
        "normalizer": None if m.normalizer is None else
        {"mean": m.normalizer.mean, "scale": m.normalizer.scale},
        "params": m.params,
    }


def save_model(m: TrainedModel, path) -> None:
    persist.write(path, _document(m))


def load_model(path) -> TrainedModel:
    doc = persist.read(path)
    try:
        norm = doc["normalizer"]
        variant = doc["variant"]
        if variant not in _SCORE:
            raise ModelFormatError(f"unknown variant tag {variant!r}")
        return TrainedModel(
            variant=variant,
            params=doc["params"],
            normalizer=None if norm is None else Normalizer(norm["mean"], norm["scale"]),
            class_names=tuple(doc["class_names"]),
            seed=int(doc["seed"]),
            n_features=int(doc["n_features"]),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
