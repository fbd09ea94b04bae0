"""
Co-occurrence matrices and their features on arrays small enough to check
by hand.
"""

import numpy as np

from acnescope.features import GlcmConfig, compute_glcm, glcm_features, quantize, region_statistics

## Two rows of constant level: every horizontal pair is (0,0) or (1,1)
levels = np.array([[0, 0],
                   [1, 1]])
g = compute_glcm(levels, None, GlcmConfig(gray_levels=2, angles=(0,)))[0]
print(g.matrix)
names = ("contrast", "correlation", "energy", "entropy", "homogeneity", "cluster_shade")
print(dict(zip(names, glcm_features(g))))

## Vertical pairs of the same image all cross levels
g90 = compute_glcm(levels, None, GlcmConfig(gray_levels=2, angles=(90,)))[90]
print(g90.matrix, "contrast", glcm_features(g90)[0])

## Quantizing a gray ramp into 8 levels
ramp = np.linspace(0, 1, 9)
print(quantize(ramp, 8))

## A checkerboard versus a smooth gradient
yy, xx = np.mgrid[:16, :16]
checker = ((yy + xx) % 2).astype(float) * 0.9
gradient = xx / 15.0
for title, img in (("checker", checker), ("gradient", gradient)):
    glcms = compute_glcm(quantize(img, 8), None, GlcmConfig())
    mean_feats = np.mean([glcm_features(x) for x in glcms.values()], axis=0)
    print(title, np.round(mean_feats, 4))

## First-order statistics of a tiny region
mu, sd, var, kurt, skew, rms, smooth = region_statistics([1, 1, 2, 3], value_range=(0, 255))
print("mean %.4f std %.6f kurtosis %.6f skewness %.6f rms %.6f" % (mu, sd, kurt, skew, rms))
