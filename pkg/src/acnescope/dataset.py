"""Manifests, augmentation and the synthetic texture benchmark."""

from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imaging import Image, save_image

__all__ = [
    "Manifest",
    "ManifestError",
    "AugmentConfig",
    "load_manifest",
    "write_manifest",
    "augment",
    "hflip",
    "rotate",
    "adjust_brightness",
    "augmented_name",
    "source_of",
    "SYNTHETIC_CLASSES",
    "render_synthetic",
    "generate_synthetic_benchmark",
]


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class Manifest:
    """Image paths relative to ``root`` with their class names."""

    entries: tuple
    root: Path
    class_names: tuple = ()

    def __post_init__(self):
        entries = tuple((str(p), str(c)) for p, c in self.entries)
        paths = [p for p, _ in entries]
        if len(set(paths)) != len(paths):
            dup = next(p for p in paths if paths.count(p) > 1)
            raise ManifestError(f"duplicate path {dup!r}")
        names = list(self.class_names)
        for _, c in entries:
            if c not in names:
                names.append(c)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "root", Path(self.root))
        object.__setattr__(self, "class_names", tuple(names))

    def __len__(self):
        return len(self.entries)

    @property
    def paths(self) -> list:
        return [p for p, _ in self.entries]

    @property
    def labels(self) -> np.ndarray:
        index = {c: i for i, c in enumerate(self.class_names)}
        return np.array([index[c] for _, c in self.entries], dtype=np.int64)

    def resolve(self, rel) -> Path:
        return self.root / rel

    def groups(self) -> list:
        """Source image of every entry; augmented copies share their source's group."""
        return [source_of(p) for p in self.paths]


def load_manifest(path, check_files: bool = True) -> Manifest:
    """Read a ``path,label`` manifest; paths are relative to the manifest's directory."""
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest {path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["path", "label"]:
        raise ManifestError(f"{path}: header must be exactly 'path,label'")
    entries = []
    for lineno, rec in enumerate(rows[1:], start=2):
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != 2:
            raise ManifestError(f"{path}:{lineno}: expected 2 columns, got {len(rec)}")
        entries.append((rec[0].strip(), rec[1].strip()))
    if not entries:
        raise ManifestError(f"{path}: empty manifest")
    m = Manifest(tuple(entries), path.parent)
    if check_files:
        for p in m.paths:
            if not m.resolve(p).is_file():
                raise ManifestError(f"missing image file {p!r} (under {m.root})")
    return m


def write_manifest(m: Manifest, path) -> None:
    with open(os.fspath(path), "w", newline="", encoding="utf-8") as fh:
        fh.write("path,label\n")
        for p, c in m.entries:
            if "," in p or "," in c or "\n" in p:
                raise ManifestError(f"manifest fields cannot contain commas or newlines: {p!r}")
            fh.write(f"{p},{c}\n")


# --------------------------------------------------------------------------
# augmentation

_AUG_SUFFIX = re.compile(r"__aug\d+(?=\.[^./\\]*$|$)")


def augmented_name(path: str, index: int) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}__aug{index}{ext or '.ppm'}"


def source_of(path: str) -> str:
    return _AUG_SUFFIX.sub("", path)


@dataclass(frozen=True)
class AugmentConfig:
    horizontal_flip: bool = True
    rotations_degrees: tuple = (-15.0, 15.0)
    brightness_deltas: tuple = (-0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        rot = tuple(float(r) for r in self.rotations_degrees)
        deltas = tuple(float(d) for d in self.brightness_deltas)
        if any(not -45 < r < 45 for r in rot):
            raise ValueError("rotations must lie in (-45, 45) degrees")
        if any(not -0.5 < d < 0.5 for d in deltas):
            raise ValueError("brightness deltas must lie in (-0.5, 0.5)")
        object.__setattr__(self, "rotations_degrees", rot)
        object.__setattr__(self, "brightness_deltas", deltas)


def hflip(img: Image) -> Image:
    return Image(img.pixels[:, ::-1])


def _mirror_index(i: np.ndarray, n: int) -> np.ndarray:
    period = 2 * n
    i = np.mod(i, period)
    return np.where(i < n, i, period - 1 - i)


def rotate(img: Image, degrees: float) -> Image:
    """Rotate about the image center; nearest-neighbour sampling, mirrored edges."""
    h, w = img.height, img.width
    th = np.deg2rad(degrees)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    r, c = np.indices((h, w), dtype=np.float64)
    y, x = r - cy, c - cx
    # inverse mapping: where does each output pixel come from
    src_y = np.cos(th) * y - np.sin(th) * x + cy
    src_x = np.sin(th) * y + np.cos(th) * x + cx
    sy = _mirror_index(np.rint(src_y).astype(np.int64), h)
    sx = _mirror_index(np.rint(src_x).astype(np.int64), w)
    return Image(img.pixels[sy, sx])


def adjust_brightness(img: Image, delta: float) -> Image:
    return Image(np.clip(img.pixels + delta, 0.0, 1.0))


def augment(img: Image, cfg: AugmentConfig = AugmentConfig()) -> list:
    """Original first, then flip, rotations and brightness shifts in config order."""
    out = [img]
    if cfg.horizontal_flip:
        out.append(hflip(img))
    out.extend(rotate(img, r) for r in cfg.rotations_degrees)
    out.extend(adjust_brightness(img, d) for d in cfg.brightness_deltas)
    return out


# --------------------------------------------------------------------------
# synthetic benchmark

SYNTHETIC_CLASSES = ("fine_checker", "coarse_checker", "diagonal_stripes", "blobs", "speckle", "smooth")
SIZE = 64


def _smooth_noise(rng, shape, length):
    from .preprocess import gaussian_kernel, _convolve_axis

    size = 2 * int(3 * length) + 1
    k = gaussian_kernel(size, length)
    field_ = _convolve_axis(_convolve_axis(rng.standard_normal(shape), k, 0), k, 1)
    field_ -= field_.min()
    return field_ / max(field_.max(), 1e-12)


def _pattern(cls: int, rng, shape):
    r, c = np.indices(shape, dtype=np.float64)
    dy, dx = rng.integers(0, 16, size=2)
    if cls == 0:
        return (((r + dy) // 2 + (c + dx) // 2) % 2).astype(np.float64), (0.50, 1.0)
    if cls == 1:
        return (((r + dy) // 6 + (c + dx) // 6) % 2).astype(np.float64), (0.75, 1.0)
    if cls == 2:
        return 0.5 + 0.5 * np.sin(2 * np.pi * (r + c + dx) / 7.0), (0.35, 1.0)
    if cls == 3:
        return _smooth_noise(rng, shape, 1.8), (0.50, 1.0)
    if cls == 4:
        return (rng.random(shape) < 0.5).astype(np.float64), (0.80, 1.0)
    return np.clip(1.0 - np.hypot(r - shape[0] / 2, c - shape[1] / 2) / 40.0, 0, 1), (0.88, 1.0)


def render_synthetic(cls: int, rng: np.random.Generator) -> tuple:
    """One benchmark image and its generating lesion disk mask."""
    shape = (SIZE, SIZE)
    r, c = np.indices(shape, dtype=np.float64)
    center = (SIZE - 1) / 2.0 + rng.uniform(-2, 2, size=2)
    radius = rng.uniform(13.0, 16.0)
    disk = np.hypot(r - center[0], c - center[1]) <= radius

    skin = np.array([0.86, 0.68, 0.58]) + rng.uniform(-0.03, 0.03, size=3)
    px = np.broadcast_to(skin, shape + (3,)).copy()
    # dark neutral vignette in the corners
    corner = np.hypot(r - (SIZE - 1) / 2.0, c - (SIZE - 1) / 2.0) > rng.uniform(33, 36)
    px[corner] = rng.uniform(0.08, 0.14)

    pattern, (lo, hi) = _pattern(cls, rng, shape)
    lo += rng.uniform(-0.03, 0.03)
    intensity = lo + (hi - lo) * pattern
    lesion = np.array([0.95, 0.35, 0.40]) + rng.uniform(-0.02, 0.02, size=3)
    px[disk] = intensity[disk, None] * lesion

    px += rng.normal(0.0, 0.01, size=px.shape)
    return Image(np.clip(px, 0.0, 1.0)), disk


def generate_synthetic_benchmark(n_per_class: int, seed: int = 42, out_dir=None):
    """Six procedural lesion-texture classes of 64x64 images.

    Image ``i`` of class ``c`` is drawn from a generator seeded by
    ``(seed, c, i)``. With ``out_dir`` the images are written as PPM files
    next to a ``manifest.csv``. Returns ``(images, manifest)``.
    """
    if n_per_class < 10:
        raise ValueError("n_per_class must be >= 10")
    images, entries = [], []
    for cls, name in enumerate(SYNTHETIC_CLASSES):
        for i in range(n_per_class):
            img, _ = render_synthetic(cls, np.random.default_rng([seed, cls, i]))
            images.append(img)
            entries.append((f"{name}/{name}_{i:04d}.ppm", name))
    root = Path(out_dir) if out_dir is not None else Path(".")
    manifest = Manifest(tuple(entries), root, SYNTHETIC_CLASSES)
    if out_dir is not None:
        for (rel, _), img in zip(entries, images):
            target = root / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            save_image(img, target)
        write_manifest(manifest, root / "manifest.csv")
    return images, manifest
