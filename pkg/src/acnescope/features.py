"""GLCM texture descriptors and first-order statistics of a masked region."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import astuple, dataclass, fields

import numpy as np

from .imaging import GrayImage

__all__ = [
    "GlcmConfig",
    "Glcm",
    "FeatureVector",
    "DegenerateRegionError",
    "Normalizer",
    "GLCM_FEATURES",
    "STAT_FEATURES",
    "FEATURE_NAMES",
    "TABLE_HEADER",
    "ANGLE_OFFSETS",
    "quantize",
    "compute_glcm",
    "glcm_features",
    "region_statistics",
    "statistical_features",
    "extract",
    "fit_normalizer",
    "apply_normalizer",
    "write_feature_table",
    "read_feature_table",
]

GLCM_FEATURES = ("contrast", "correlation", "energy", "entropy", "homogeneity", "cluster_shade")
STAT_FEATURES = ("mean", "std", "variance", "kurtosis", "skewness", "rms", "smoothness")
FEATURE_NAMES = GLCM_FEATURES + STAT_FEATURES
TABLE_HEADER = ("path", "label") + FEATURE_NAMES

# (row step, column step) per unit distance; rows grow downwards
ANGLE_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}

_DEGENERATE_SIGMA = 1e-12


class DegenerateRegionError(ValueError):
    """The masked region yields no pixel pairs (or no pixels)."""


@dataclass(frozen=True)
class GlcmConfig:
    gray_levels: int = 8
    distance: int = 1
    angles: tuple = (0, 45, 90, 135)
    symmetric: bool = True
    masked_pairs_only: bool = True

    def __post_init__(self):
        if self.gray_levels < 2:
            raise ValueError("gray_levels must be >= 2")
        if self.distance < 1:
            raise ValueError("distance must be >= 1")
        angles = tuple(int(a) for a in self.angles)
        if not angles:
            raise ValueError("angles must be non-empty")
        bad = [a for a in angles if a not in ANGLE_OFFSETS]
        if bad:
            raise ValueError(f"unsupported angles {bad}; choose from {sorted(ANGLE_OFFSETS)}")
        object.__setattr__(self, "angles", angles)


@dataclass(frozen=True, eq=False)
class Glcm:
    matrix: np.ndarray
    pair_count: int


@dataclass(frozen=True)
class FeatureVector:
    contrast: float
    correlation: float
    energy: float
    entropy: float
    homogeneity: float
    cluster_shade: float
    mean: float
    std: float
    variance: float
    kurtosis: float
    skewness: float
    rms: float
    smoothness: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "FeatureVector":
        values = [float(v) for v in values]
        if len(values) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} values, got {len(values)}")
        return cls(*values)

    def __len__(self):
        return len(fields(self))


def quantize(gray, levels: int) -> np.ndarray:
    """Map values in [0, 1] to integer levels ``0 .. levels-1``."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    px = gray.pixels if isinstance(gray, GrayImage) else np.asarray(gray, dtype=np.float64)
    return np.minimum(np.floor(px * levels), levels - 1).astype(np.int64)


def _pairs(levels: np.ndarray, mask: np.ndarray, dr: int, dc: int):
    h, w = levels.shape
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    if r0 >= r1 or c0 >= c1:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    a = levels[r0:r1, c0:c1]
    b = levels[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    ok = mask[r0:r1, c0:c1] & mask[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
    return a[ok], b[ok]


def compute_glcm(levels, mask=None, cfg: GlcmConfig = GlcmConfig()) -> dict:
    """Normalized co-occurrence matrix for every configured angle.

    Returns ``{angle: Glcm}``. An angle with no valid pair carries an
    all-zero matrix and ``pair_count == 0``; if no angle has a pair the
    region is degenerate.
    """
    levels = np.asarray(levels, dtype=np.int64)
    L = cfg.gray_levels
    if levels.size and (levels.min() < 0 or levels.max() >= L):
        raise ValueError(f"levels must lie in [0, {L - 1}]")
    if mask is None:
        mask = np.ones(levels.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != levels.shape:
        raise ValueError("mask and level image differ in shape")
    pair_mask = mask if cfg.masked_pairs_only else np.ones_like(mask)
    out = {}
    for angle in cfg.angles:
        dr, dc = ANGLE_OFFSETS[angle]
        i, j = _pairs(levels, pair_mask, dr * cfg.distance, dc * cfg.distance)
        counts = np.bincount(i * L + j, minlength=L * L).reshape(L, L).astype(np.float64)
        if cfg.symmetric:
            counts = counts + counts.T
        total = counts.sum()
        matrix = counts / total if total > 0 else counts
        out[angle] = Glcm(matrix, int(total))
    if all(g.pair_count == 0 for g in out.values()):
        raise DegenerateRegionError("degenerate region: no valid pixel pairs")
    return out


def glcm_features(g: Glcm) -> tuple:
    """(contrast, correlation, energy, entropy, homogeneity, cluster_shade)."""
    P = g.matrix if isinstance(g, Glcm) else np.asarray(g, dtype=np.float64)
    n = P.shape[0]
    i, j = np.indices((n, n), dtype=np.float64)
    mu_x = (i * P).sum()
    mu_y = (j * P).sum()
    sd_x = math.sqrt(max(((i - mu_x) ** 2 * P).sum(), 0.0))
    sd_y = math.sqrt(max(((j - mu_y) ** 2 * P).sum(), 0.0))
    contrast = ((i - j) ** 2 * P).sum()
    if sd_x * sd_y < _DEGENERATE_SIGMA:
        correlation = 1.0
    else:
        correlation = ((i * j * P).sum() - mu_x * mu_y) / (sd_x * sd_y)
    energy = (P * P).sum()
    nz = P[P > 0]
    entropy = -(nz * np.log2(nz)).sum()
    homogeneity = (P / (1.0 + (i - j) ** 2)).sum()
    cluster_shade = ((i + j - mu_x - mu_y) ** 3 * P).sum()
    return tuple(float(v) for v in (contrast, correlation, energy, entropy, homogeneity, cluster_shade))


def region_statistics(values, mode_levels: int = 256, value_range=(0.0, 1.0)) -> tuple:
    """(mean, std, variance, kurtosis, skewness, rms, smoothness) of ``values``.

    Population moments throughout. Kurtosis is excess kurtosis. Skewness is
    Pearson's mode skewness ``(mean - mode) / std`` where the mode is taken
    over ``mode_levels`` evenly spaced levels spanning ``value_range``
    (lowest level wins ties). Both are 0 for a zero-variance region.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise DegenerateRegionError("empty region")
    n = x.size
    mu = x.sum() / n
    dev = x - mu
    var = (dev * dev).sum() / n
    sd = math.sqrt(var)
    lo, hi = value_range
    step = (hi - lo) / (mode_levels - 1)
    bins = np.clip(np.rint((x - lo) / step), 0, mode_levels - 1).astype(np.int64)
    mode = lo + int(np.argmax(np.bincount(bins, minlength=mode_levels))) * step
    if sd < _DEGENERATE_SIGMA:
        kurt = 0.0
        skew = 0.0
    else:
        kurt = ((dev ** 4).sum() / n) / (var * var) - 3.0
        skew = (mu - mode) / sd
    rms = math.sqrt((x * x).sum() / n)
    smooth = 1.0 - 1.0 / (1.0 + var)
    return tuple(float(v) for v in (mu, sd, var, kurt, skew, rms, smooth))


def statistical_features(gray, mask=None) -> tuple:
    px = gray.pixels if isinstance(gray, GrayImage) else np.asarray(gray, dtype=np.float64)
    if mask is None:
        return region_statistics(px)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise DegenerateRegionError("empty mask")
    return region_statistics(px[mask])


def extract(gray, mask=None, cfg: GlcmConfig = GlcmConfig()) -> FeatureVector:
    """Angle-averaged GLCM features followed by region statistics.

    Angles without any valid pair are left out of the average.
    """
    px = gray.pixels if isinstance(gray, GrayImage) else np.asarray(gray, dtype=np.float64)
    if mask is None:
        mask = np.ones(px.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    levels = quantize(px, cfg.gray_levels)
    glcms = compute_glcm(levels, mask, cfg)
    per_angle = [glcm_features(g) for a, g in sorted(glcms.items()) if g.pair_count > 0]
    texture = np.mean(np.array(per_angle), axis=0)
    stats = statistical_features(px, mask)
    return FeatureVector(*texture.tolist(), *stats)


# --------------------------------------------------------------------------
# normalization

@dataclass(frozen=True, eq=False)
class Normalizer:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean) / self.scale


def fit_normalizer(vectors) -> Normalizer:
    """Per-dimension z-score; zero-variance dimensions are only centered."""
    X = np.asarray([v.as_array() if isinstance(v, FeatureVector) else v for v in vectors], dtype=np.float64)
    if X.ndim != 2 or len(X) < 2:
        raise ValueError("need at least 2 training vectors")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.where(std < _DEGENERATE_SIGMA, 1.0, std)
    return Normalizer(mean, scale)


def apply_normalizer(n: Normalizer, v):
    if isinstance(v, FeatureVector):
        return FeatureVector.from_array(n.transform(v.as_array()))
    return n.transform(v)


# --------------------------------------------------------------------------
# feature table

def write_feature_table(path, rows) -> None:
    """Write ``(path, label, FeatureVector)`` rows as comma-delimited text."""
    with open(os.fspath(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for img_path, label, fv in rows:
            w.writerow([img_path, label] + [repr(float(v)) for v in astuple(fv)])


def read_feature_table(path):
    """Inverse of :func:`write_feature_table`; returns a list of rows."""
    with open(os.fspath(path), newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or tuple(header) != TABLE_HEADER:
            raise ValueError(f"{path}: incompatible feature-table header {header}")
        rows = []
        for lineno, rec in enumerate(r, start=2):
            if not rec:
                continue
            if len(rec) != len(TABLE_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(TABLE_HEADER)} columns")
            rows.append((rec[0], rec[1], FeatureVector.from_array(rec[2:])))
    return rows
