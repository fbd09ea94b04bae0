"""
Per-class metrics from binary confusion counts, and how a multi-class
matrix splits into one-vs-rest counts.
"""

import numpy as np

from acnescope.evaluate import METRIC_NAMES, BinaryCM, MultiClassCM, binarize, metrics, roc

## Six one-vs-rest matrices from a 420-image test fold: (tp, fn, fp, tn)
cells = {
    "ACC": (77, 5, 3, 335),
    "AC": (57, 3, 3, 357),
    "AE": (63, 5, 4, 348),
    "AK": (64, 2, 2, 352),
    "AOC": (72, 2, 2, 344),
    "AP": (68, 5, 2, 345),
}
print("%-4s" % "" + "".join("%12s" % m for m in METRIC_NAMES))
for name, (tp, fn, fp, tn) in cells.items():
    m = metrics(BinaryCM(tp, fn, fp, tn))
    print("%-4s" % name + "".join("%12.4f" % v for v in m.values()))

## Rows are actual classes, columns predicted
cm = MultiClassCM(np.array([[5, 1, 0],
                            [2, 6, 1],
                            [0, 0, 7]]))
for i in range(3):
    print("class", i, binarize(cm, i))

## ROC with one inverted pair
r = roc([1, 0, 1, 0], [0.9, 0.8, 0.4, 0.2])
print(r.points.tolist(), "AUC", r.auc)
