"""
The synthetic six-class texture benchmark, end to end in memory.

Every image is segmented and featurized, then all five classifiers are
cross-validated on identical folds. The texture-only and statistics-only
feature groups are run with the random forest for comparison.

    python3 demos/benchmark.py [n_per_class]
"""

import sys
import time

import numpy as np

from acnescope.classify import VARIANTS, LabeledSet
from acnescope.config import PipelineConfig
from acnescope.dataset import generate_synthetic_benchmark
from acnescope.evaluate import cross_validate, split_kfold
from acnescope.pipeline import analyze

n_per_class = int(sys.argv[1]) if len(sys.argv) > 1 else 60

## Images and features
t0 = time.perf_counter()
images, manifest = generate_synthetic_benchmark(n_per_class, seed=42)
cfg = PipelineConfig()
X = np.array([analyze(img, cfg)[0].as_array() for img in images])
data = LabeledSet(X, manifest.labels, manifest.class_names)
print("%d images featurized in %.1f s" % (len(images), time.perf_counter() - t0))

## Class means of GLCM contrast
for c, name in enumerate(data.class_names):
    print("  %-18s contrast %.3f" % (name, X[data.labels == c, 0].mean()))

## Five classifiers, one set of folds
folds = split_kfold(data.labels, 5, seed=42)
for v in VARIANTS:
    rep = cross_validate(v, data, folds=folds, seed=42)
    print("%-4s accuracy %6.2f%%  macro AUC %.4f" % (v, rep.accuracy, rep.macro_auc))

## Feature groups
for title, cols in (("GLCM only", range(6)), ("statistics only", range(6, 13))):
    rep = cross_validate("RF", data.select_features(cols), folds=folds, seed=42)
    print("RF %-16s %6.2f%%" % (title, rep.accuracy))
