"""
One synthetic lesion image through every stage: enhancement, L*a*b*,
k-means segmentation and the 13 texture/statistical features.

    python3 demos/single_image.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from acnescope.dataset import render_synthetic
from acnescope.features import FEATURE_NAMES, extract
from acnescope.imaging import save_image
from acnescope.preprocess import PreprocessConfig, preprocess_pipeline
from acnescope.segment import KMeansConfig, mask_overlay, segment_image

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")
out.mkdir(exist_ok=True)

## A 64x64 "blobs" image and the disk it was drawn from
img, disk = render_synthetic(3, np.random.default_rng([42, 3, 0]))
save_image(img, out / "input.ppm")

## Detail boost, smoothing, colour conversion
lab, gray = preprocess_pipeline(img, PreprocessConfig())
print("L* range %.1f .. %.1f" % (lab.L.min(), lab.L.max()))
print("a* range %.1f .. %.1f" % (lab.a.min(), lab.a.max()))

## Three clusters on (a*, b*); the reddest one is the lesion
seg = segment_image(lab, KMeansConfig(k=3, seed=0))
print("cluster centers (a*, b*):")
print(np.round(seg.centers, 2))
print("lesion cluster:", seg.lesion_cluster)
iou = (seg.lesion_mask & disk).sum() / (seg.lesion_mask | disk).sum()
print("IoU with the generating disk: %.3f" % iou)
save_image(mask_overlay(img, seg.lesion_mask), out / "overlay.ppm")

## Features inside the lesion mask
fv = extract(gray, seg.lesion_mask)
for name, value in zip(FEATURE_NAMES, fv.as_array()):
    print("  %-14s %10.5f" % (name, value))
