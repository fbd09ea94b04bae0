"""Single-image and corpus feature extraction."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import PipelineConfig
from .features import FeatureVector, extract
from .imaging import Image, load_image, to_gray
from .preprocess import preprocess_pipeline
from .segment import SegmentationResult, segment_image

__all__ = ["analyze", "analyze_path", "extract_corpus"]

log = logging.getLogger(__name__)


def _feature_gray(img: Image, lab, gray, source: str) -> np.ndarray:
    if source == "gray":
        return gray.pixels
    if source == "lightness":
        return np.clip(lab.L / 100.0, 0.0, 1.0)
    return to_gray(img).pixels


def analyze(img: Image, cfg: PipelineConfig = PipelineConfig()) -> tuple[FeatureVector, SegmentationResult]:
    """Preprocess, segment and describe one image."""
    lab, gray = preprocess_pipeline(img, cfg.preprocess)
    seg = segment_image(lab, cfg.segment)
    fv = extract(_feature_gray(img, lab, gray, cfg.feature_source), seg.lesion_mask, cfg.glcm)
    return fv, seg


def analyze_path(path, cfg: PipelineConfig = PipelineConfig()):
    return analyze(load_image(path), cfg)


def _job(args):
    path, cfg = args
    try:
        fv, _ = analyze_path(path, cfg)
        return fv, None
    except Exception as exc:  # reported per image by the caller
        return None, f"{type(exc).__name__}: {exc}"


def extract_corpus(paths, cfg: PipelineConfig = PipelineConfig(), jobs: int = 1):
    """Feature vectors for ``paths`` in input order.

    Returns a list of ``(FeatureVector or None, error message or None)``.
    """
    tasks = [(p, cfg) for p in paths]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_job, tasks, chunksize=4))
    return [_job(t) for t in tasks]
