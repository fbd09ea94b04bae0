"""Slow, independent reference implementations used only by the tests.

Nothing here imports from acnescope; loops are deliberately naive.
"""

import math

# --------------------------------------------------------------------------
# colour

# Lindbloom's sRGB -> XYZ (D65) matrix and the CIE rational constants
SRGB_TO_XYZ = (
    (0.4124564, 0.3575761, 0.1804375),
    (0.2126729, 0.7151522, 0.0721750),
    (0.0193339, 0.1191920, 0.9503041),
)
D65 = (0.95047, 1.0, 1.08883)
CIE_E = 216.0 / 24389.0
CIE_K = 24389.0 / 27.0


def srgb_to_lab(rgb):
    lin = []
    for c in rgb:
        lin.append(c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4)
    xyz = [sum(SRGB_TO_XYZ[r][k] * lin[k] for k in range(3)) for r in range(3)]
    f = []
    for v, n in zip(xyz, D65):
        t = v / n
        f.append(t ** (1.0 / 3.0) if t > CIE_E else (CIE_K * t + 16.0) / 116.0)
    return (116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2]))


# --------------------------------------------------------------------------
# guided filter, evaluated window by window

def _window_mean(img, r, y, x):
    h, w = len(img), len(img[0])
    s, n = 0.0, 0
    for yy in range(max(0, y - r), min(h, y + r + 1)):
        for xx in range(max(0, x - r), min(w, x + r + 1)):
            s += img[yy][xx]
            n += 1
    return s / n


def guided_self_filter(p, r, eps):
    h, w = len(p), len(p[0])
    pp = [[v * v for v in row] for row in p]
    a = [[0.0] * w for _ in range(h)]
    b = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            m = _window_mean(p, r, y, x)
            var = _window_mean(pp, r, y, x) - m * m
            a[y][x] = var / (var + eps)
            b[y][x] = m - a[y][x] * m
    return [[_window_mean(a, r, y, x) * p[y][x] + _window_mean(b, r, y, x) for x in range(w)]
            for y in range(h)]


def detail_boost(p, r, eps, gain):
    q = guided_self_filter(p, r, eps)
    return [[min(1.0, max(0.0, q[y][x] + gain * (p[y][x] - q[y][x]))) for x in range(len(p[0]))]
            for y in range(len(p))]


# --------------------------------------------------------------------------
# GLCM

OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}


def glcm_counts(levels, mask, L, distance, angle, symmetric=True):
    h, w = len(levels), len(levels[0])
    dr, dc = OFFSETS[angle]
    dr, dc = dr * distance, dc * distance
    counts = [[0] * L for _ in range(L)]
    for y in range(h):
        for x in range(w):
            y2, x2 = y + dr, x + dc
            if not (0 <= y2 < h and 0 <= x2 < w):
                continue
            if not (mask[y][x] and mask[y2][x2]):
                continue
            i, j = levels[y][x], levels[y2][x2]
            counts[i][j] += 1
            if symmetric:
                counts[j][i] += 1
    return counts


def normalize(counts):
    total = sum(sum(row) for row in counts)
    return [[c / total for c in row] for row in counts], total


def glcm_features(P):
    n = len(P)
    mx = sum(i * P[i][j] for i in range(n) for j in range(n))
    my = sum(j * P[i][j] for i in range(n) for j in range(n))
    vx = sum((i - mx) ** 2 * P[i][j] for i in range(n) for j in range(n))
    vy = sum((j - my) ** 2 * P[i][j] for i in range(n) for j in range(n))
    contrast = energy = entropy = homogeneity = shade = cross = 0.0
    for i in range(n):
        for j in range(n):
            p = P[i][j]
            contrast += (i - j) ** 2 * p
            energy += p * p
            if p > 0:
                entropy -= p * math.log2(p)
            homogeneity += p / (1 + (i - j) ** 2)
            shade += (i + j - mx - my) ** 3 * p
            cross += i * j * p
    sx, sy = math.sqrt(max(vx, 0.0)), math.sqrt(max(vy, 0.0))
    corr = 1.0 if sx * sy < 1e-12 else (cross - mx * my) / (sx * sy)
    return (contrast, corr, energy, entropy, homogeneity, shade)


# --------------------------------------------------------------------------
# first-order statistics

def region_stats(values, levels=256, lo=0.0, hi=1.0):
    n = len(values)
    mu = sum(values) / n
    m2 = sum((v - mu) ** 2 for v in values) / n
    m4 = sum((v - mu) ** 4 for v in values) / n
    sd = math.sqrt(m2)
    step = (hi - lo) / (levels - 1)
    hist = {}
    for v in values:
        b = min(max(int(round((v - lo) / step)), 0), levels - 1)
        hist[b] = hist.get(b, 0) + 1
    top = max(hist.values())
    mode = lo + min(b for b, c in hist.items() if c == top) * step
    if sd < 1e-12:
        kurt = skew = 0.0
    else:
        kurt = m4 / (m2 * m2) - 3.0
        skew = (mu - mode) / sd
    rms = math.sqrt(sum(v * v for v in values) / n)
    return (mu, sd, m2, kurt, skew, rms, 1.0 - 1.0 / (1.0 + m2))


# --------------------------------------------------------------------------
# Lloyd's algorithm on plain lists

def lloyd(points, centers, max_iterations, tolerance):
    """Returns the per-iteration (assignment, centers, J) trace."""
    centers = [list(c) for c in centers]
    k = len(centers)

    def nearest(p):
        best, bi = None, -1
        for ci, c in enumerate(centers):
            d = sum((a - b) ** 2 for a, b in zip(p, c))
            if best is None or d < best:
                best, bi = d, ci
        return bi, best

    assign = [nearest(p)[0] for p in points]
    trace = []
    for _ in range(max_iterations):
        new = []
        for ci in range(k):
            members = [p for p, a in zip(points, assign) if a == ci]
            new.append([sum(col) / len(members) for col in zip(*members)])
        shift = max(math.sqrt(sum((a - b) ** 2 for a, b in zip(c0, c1))) for c0, c1 in zip(centers, new))
        centers = new
        res = [nearest(p) for p in points]
        new_assign = [a for a, _ in res]
        J = sum(d for _, d in res)
        trace.append((new_assign, [list(c) for c in centers], J))
        stable = new_assign == assign
        assign = new_assign
        if stable or shift <= tolerance:
            break
    return trace


# --------------------------------------------------------------------------
# ROC by pair counting

def auc_pairs(labels, scores):
    pos = [s for l, s in zip(labels, scores) if l]
    neg = [s for l, s in zip(labels, scores) if not l]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))
