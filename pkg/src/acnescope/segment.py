"""K-means clustering of L*a*b* pixels and lesion-mask selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imaging import GrayImage, Image
from .preprocess import LabImage

__all__ = [
    "KMeansConfig",
    "KMeansResult",
    "SegmentationResult",
    "kmeans",
    "lloyd",
    "kmeans_plus_plus",
    "nearest_center",
    "distortion",
    "segment_image",
    "select_lesion_cluster",
    "mask_to_gray",
    "mask_overlay",
]

FEATURE_SPACES = ("ab", "lab")


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 3
    max_iterations: int = 100
    restarts: int = 5
    tolerance: float = 1e-4
    seed: int = 0
    feature_space: str = "ab"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.feature_space not in FEATURE_SPACES:
            raise ValueError(f"feature_space must be one of {FEATURE_SPACES}")


@dataclass(frozen=True, eq=False)
class KMeansResult:
    assignments: np.ndarray
    centers: np.ndarray
    distortion: float
    history: tuple = ()
    restart: int = 0


@dataclass(frozen=True, eq=False)
class SegmentationResult:
    assignments: np.ndarray  # (height, width) cluster index
    centers: np.ndarray
    distortion: float
    lesion_cluster: int
    lesion_mask: np.ndarray = field(repr=False)


def nearest_center(points: np.ndarray, centers: np.ndarray):
    """Index of and squared distance to the nearest center; ties go to the lowest index."""
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    idx = np.argmin(d2, axis=1)
    return idx, d2[np.arange(len(points)), idx]


def distortion(points, assignments, centers) -> float:
    points = np.asarray(points, dtype=np.float64)
    diff = points - np.asarray(centers)[assignments]
    return float((diff * diff).sum())


def kmeans_plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = [points[rng.integers(n)]]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # fewer distinct points than k; caller has already checked this
            raise ValueError("cannot seed more centers than distinct points")
        idx = rng.choice(n, p=d2 / total)
        centers.append(points[idx])
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _fill_empty(points, assign, d2, centers):
    """Move each empty center onto the point farthest from its own center."""
    k = len(centers)
    counts = np.bincount(assign, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if len(empty) == 0:
        return False
    for j in empty:
        counts = np.bincount(assign, minlength=k)
        score = np.where(counts[assign] > 1, d2, -1.0)
        p = int(np.argmax(score))
        centers[j] = points[p]
        assign[p] = j
        d2[p] = 0.0
    return True


def lloyd(points, centers, max_iterations: int = 100, tolerance: float = 1e-4) -> KMeansResult:
    """Lloyd iterations from fixed initial ``centers``.

    ``history`` records the distortion after every update step; it never
    increases.
    """
    points = np.asarray(points, dtype=np.float64)
    centers = np.array(centers, dtype=np.float64)
    k = len(centers)
    assign, d2 = nearest_center(points, centers)
    reseeded = _fill_empty(points, assign, d2, centers)
    history = []
    for _ in range(max_iterations):
        new_centers = np.zeros_like(centers)
        np.add.at(new_centers, assign, points)
        counts = np.bincount(assign, minlength=k)
        new_centers /= counts[:, None]
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        new_assign, d2 = nearest_center(points, centers)
        reseeded = _fill_empty(points, new_assign, d2, centers)
        j = distortion(points, new_assign, centers)
        if history and j > history[-1] * (1 + 1e-12) + 1e-12:
            raise AssertionError(f"distortion increased: {history[-1]!r} -> {j!r}")
        history.append(j)
        stable = np.array_equal(new_assign, assign)
        assign = new_assign
        if not reseeded and (stable or shift <= tolerance):
            break
    if reseeded:
        assign, _ = nearest_center(points, centers)
    return KMeansResult(assign, centers, distortion(points, assign, centers), tuple(history))


def kmeans(points, cfg: KMeansConfig = KMeansConfig()) -> KMeansResult:
    """Best-of-restarts k-means with k-means++ seeding.

    Restart ``r`` draws from a generator seeded by ``(cfg.seed, r)``, so the
    outcome of each restart does not depend on how many restarts are run.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if len(points) == 0:
        raise ValueError("no points to cluster")
    n_distinct = len(np.unique(points, axis=0))
    if cfg.k > n_distinct:
        raise ValueError(f"k={cfg.k} exceeds the number of distinct points ({n_distinct})")
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        init = kmeans_plus_plus(points, cfg.k, rng)
        res = lloyd(points, init, cfg.max_iterations, cfg.tolerance)
        if best is None or res.distortion < best.distortion:
            best = KMeansResult(res.assignments, res.centers, res.distortion, res.history, r)
    return best


def select_lesion_cluster(assignments, lab: LabImage, k: int | None = None) -> int:
    """Most red cluster: highest mean a*, ties broken by higher mean L*."""
    assignments = np.asarray(assignments).ravel()
    a = lab.a.ravel()
    L = lab.L.ravel()
    k = int(assignments.max()) + 1 if k is None else k
    best, best_key = -1, None
    for j in range(k):
        sel = assignments == j
        if not sel.any():
            continue
        key = (a[sel].mean(), L[sel].mean())
        if best_key is None or key > best_key:
            best, best_key = j, key
    return best


def segment_image(lab: LabImage, cfg: KMeansConfig = KMeansConfig()) -> SegmentationResult:
    px = lab.pixels.reshape(-1, 3)
    points = px[:, 1:] if cfg.feature_space == "ab" else px
    res = kmeans(points, cfg)
    shape = (lab.height, lab.width)
    lesion = select_lesion_cluster(res.assignments, lab, cfg.k)
    assignments = res.assignments.reshape(shape)
    return SegmentationResult(
        assignments=assignments,
        centers=res.centers,
        distortion=res.distortion,
        lesion_cluster=lesion,
        lesion_mask=assignments == lesion,
    )


def mask_to_gray(mask) -> GrayImage:
    return GrayImage(np.asarray(mask, dtype=np.float64))


def mask_overlay(img: Image, mask, tint=(0.0, 1.0, 0.0), alpha: float = 0.5) -> Image:
    """Blend ``tint`` into the lesion pixels for visual inspection."""
    px = np.array(img.pixels)
    m = np.asarray(mask, dtype=bool)
    px[m] = (1 - alpha) * px[m] + alpha * np.asarray(tint)
    return Image(px)
