"""Contrast enhancement, Gaussian smoothing and RGB to CIE L*a*b* conversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import Image, to_gray

__all__ = [
    "PreprocessConfig",
    "LabImage",
    "box_mean",
    "guided_filter",
    "enhance_contrast",
    "gaussian_kernel",
    "gaussian_smooth",
    "srgb_to_linear",
    "lab_f",
    "rgb_to_xyz_matrix",
    "rgb_to_lab",
    "preprocess_pipeline",
    "LAB_EPSILON",
]

# linear-RGB from XYZ as commonly printed; the forward matrix is its inverse
XYZ_TO_LINEAR_RGB = np.array([
    [3.240479, -1.537150, -0.498535],
    [-0.969256, 1.875992, 0.041556],
    [0.055648, -0.204043, 1.057311],
])

LAB_EPSILON = 0.008856
LAB_KAPPA = 903.3


@dataclass(frozen=True)
class PreprocessConfig:
    guided_radius: int = 8
    guided_epsilon: float = 0.01
    detail_gain: float = 2.0
    gaussian_sigma: float = 1.0
    gaussian_kernel_size: int = 5
    white_point: tuple = (0.95047, 1.0, 1.08883)

    def __post_init__(self):
        if self.guided_radius < 1:
            raise ValueError("guided_radius must be >= 1")
        if not self.guided_epsilon > 0:
            raise ValueError("guided_epsilon must be > 0")
        if not self.gaussian_sigma > 0:
            raise ValueError("gaussian_sigma must be > 0")
        if self.gaussian_kernel_size < 3 or self.gaussian_kernel_size % 2 == 0:
            raise ValueError("gaussian_kernel_size must be odd and >= 3")
        wp = tuple(float(v) for v in self.white_point)
        if len(wp) != 3 or min(wp) <= 0:
            raise ValueError("white_point must be three positive tristimulus values")
        object.__setattr__(self, "white_point", wp)


@dataclass(frozen=True, eq=False)
class LabImage:
    """CIE L*a*b* raster, ``pixels`` has shape ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64, copy=True)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"expected (height, width, 3) array, got shape {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def L(self) -> np.ndarray:
        return self.pixels[..., 0]

    @property
    def a(self) -> np.ndarray:
        return self.pixels[..., 1]

    @property
    def b(self) -> np.ndarray:
        return self.pixels[..., 2]


# --------------------------------------------------------------------------
# guided filter

def _window_sum_1d(x: np.ndarray, r: int, axis: int) -> np.ndarray:
    n = x.shape[axis]
    c = np.cumsum(x, axis=axis)
    zero_shape = list(x.shape)
    zero_shape[axis] = 1
    c = np.concatenate([np.zeros(zero_shape), c], axis=axis)
    idx = np.arange(n)
    hi = np.minimum(idx + r + 1, n)
    lo = np.maximum(idx - r, 0)
    return np.take(c, hi, axis=axis) - np.take(c, lo, axis=axis)


def box_mean(x: np.ndarray, r: int) -> np.ndarray:
    """Mean over the ``(2r+1)^2`` window, truncated at the image border."""
    x = np.asarray(x, dtype=np.float64)
    s = _window_sum_1d(_window_sum_1d(x, r, 0), r, 1)
    ones = np.ones(x.shape[:2])
    n = _window_sum_1d(_window_sum_1d(ones, r, 0), r, 1)
    if x.ndim == 3:
        n = n[..., None]
    return s / n


def guided_filter(guide: np.ndarray, src: np.ndarray, radius: int, eps: float) -> np.ndarray:
    """Edge-preserving guided filter on 2-D arrays."""
    mean_i = box_mean(guide, radius)
    mean_p = box_mean(src, radius)
    cov_ip = box_mean(guide * src, radius) - mean_i * mean_p
    var_i = box_mean(guide * guide, radius) - mean_i * mean_i
    a = cov_ip / (var_i + eps)
    b = mean_p - a * mean_i
    return box_mean(a, radius) * guide + box_mean(b, radius)


def enhance_contrast(img: Image, cfg: PreprocessConfig = PreprocessConfig()) -> Image:
    """Boost the detail layer left over by a self-guided filter.

    Each channel ``p`` is split into a base ``q = guided_filter(p, p)`` and a
    detail ``p - q``; the result is ``clip(q + detail_gain * (p - q), 0, 1)``.
    Windows larger than the image are truncated to it.
    """
    out = np.empty_like(img.pixels)
    for ch in range(3):
        p = img.pixels[..., ch]
        q = guided_filter(p, p, cfg.guided_radius, cfg.guided_epsilon)
        out[..., ch] = q + cfg.detail_gain * (p - q)
    return Image(np.clip(out, 0.0, 1.0))


# --------------------------------------------------------------------------
# Gaussian smoothing

def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _convolve_axis(x: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    half = len(kernel) // 2
    pad = [(0, 0)] * x.ndim
    pad[axis] = (half, half)
    # half-sample symmetric extension keeps the operator doubly stochastic
    xp = np.pad(x, pad, mode="symmetric")
    n = x.shape[axis]
    out = np.zeros_like(x)
    for t, w in enumerate(kernel):
        out += w * np.take(xp, np.arange(t, t + n), axis=axis)
    return out


def gaussian_smooth(img: Image, cfg: PreprocessConfig = PreprocessConfig()) -> Image:
    """Separable Gaussian blur with mirrored borders, applied per channel."""
    k = gaussian_kernel(cfg.gaussian_kernel_size, cfg.gaussian_sigma)
    out = _convolve_axis(_convolve_axis(img.pixels, k, 0), k, 1)
    return Image(np.clip(out, 0.0, 1.0))


# --------------------------------------------------------------------------
# colour conversion

def srgb_to_linear(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def rgb_to_xyz_matrix(white_point=PreprocessConfig().white_point) -> np.ndarray:
    """Linear RGB to XYZ, rows scaled so that RGB white lands on ``white_point``."""
    m = np.linalg.inv(XYZ_TO_LINEAR_RGB)
    return m * (np.asarray(white_point, dtype=np.float64) / m.sum(axis=1))[:, None]


def lab_f(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > LAB_EPSILON, np.cbrt(x), 7.787 * x + 16.0 / 116.0)


def rgb_to_lab(img: Image, cfg: PreprocessConfig = PreprocessConfig()) -> LabImage:
    lin = srgb_to_linear(img.pixels)
    xyz = lin @ rgb_to_xyz_matrix(cfg.white_point).T
    ratios = xyz / np.asarray(cfg.white_point)
    fx, fy, fz = (lab_f(ratios[..., i]) for i in range(3))
    y = ratios[..., 1]
    L = np.where(y > LAB_EPSILON, 116.0 * np.cbrt(y) - 16.0, LAB_KAPPA * y)
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    return LabImage(np.stack([L, a, b], axis=-1))


def preprocess_pipeline(img: Image, cfg: PreprocessConfig = PreprocessConfig()):
    """Enhance, smooth, convert.

    Returns ``(lab, gray)`` where ``gray`` is the luminance of the enhanced
    and smoothed image, the source used for texture features.
    """
    smoothed = gaussian_smooth(enhance_contrast(img, cfg), cfg)
    return rgb_to_lab(smoothed, cfg), to_gray(smoothed)
