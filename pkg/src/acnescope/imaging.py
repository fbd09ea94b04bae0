"""Pixel containers and raster I/O.

Images are held as float64 numpy arrays with channel values in ``[0, 1]``.
Quantization to 8 bits happens only when reading or writing files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Image",
    "GrayImage",
    "ImageFormatError",
    "load_image",
    "load_gray",
    "save_image",
    "save_gray",
    "to_gray",
    "BT601_WEIGHTS",
]

BT601_WEIGHTS = np.array([0.299, 0.587, 0.114])


class ImageFormatError(ValueError):
    """Raised for unsupported, corrupt, or empty raster files."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Image:
    """RGB raster, ``pixels`` has shape ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = _frozen(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image dimensions must be >= 1")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("channel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    @classmethod
    def from_uint8(cls, data) -> "Image":
        return cls(np.asarray(data, dtype=np.uint8) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return _quantize8(self.pixels)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single-channel raster, ``pixels`` has shape ``(height, width)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = _frozen(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"expected (height, width) array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image dimensions must be >= 1")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def to_uint8(self) -> np.ndarray:
        return _quantize8(self.pixels)


def _quantize8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values * 255.0), 0, 255).astype(np.uint8)


def to_gray(img: Image) -> GrayImage:
    """Luminance with ITU-R BT.601 weights."""
    gray = img.pixels @ BT601_WEIGHTS
    # weights sum to 1 but the dot product can drift by an ulp past the bounds
    lo = img.pixels.min(axis=2)
    hi = img.pixels.max(axis=2)
    return GrayImage(np.clip(gray, lo, hi))


# --------------------------------------------------------------------------
# Portable any-map (P5 / P6)

def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageFormatError("truncated header")
    return buf[start:pos], pos


def _decode_pnm(buf: bytes) -> np.ndarray:
    """Return a uint8 array of shape (h, w, c) with c = 1 or 3."""
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"unsupported magic {magic!r}")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ImageFormatError(f"corrupt header field {tok!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError("image dimension is 0")
    if not 1 <= maxval <= 255:
        raise ImageFormatError(f"unsupported maxval {maxval} (only 8-bit supported)")
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise ImageFormatError("corrupt header: missing separator before raster")
    pos += 1
    channels = 3 if magic == b"P6" else 1
    size = width * height * channels
    raster = buf[pos:pos + size]
    if len(raster) != size:
        raise ImageFormatError(f"truncated raster: expected {size} bytes, got {len(raster)}")
    data = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)
    if maxval != 255:
        if data.max() > maxval:
            raise ImageFormatError("sample exceeds maxval")
        data = np.rint(data.astype(np.float64) * (255.0 / maxval)).astype(np.uint8)
    return data


def _read_raster(path) -> np.ndarray:
    path = os.fspath(path)
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:1] == b"P":
        return _decode_pnm(buf)
    try:
        from PIL import Image as PILImage
    except ImportError:
        raise ImageFormatError(f"{path}: unsupported format") from None
    try:
        with PILImage.open(path) as im:
            im = im.convert("RGB")
            data = np.asarray(im, dtype=np.uint8)
    except Exception as exc:  # Pillow raises a zoo of exception types
        raise ImageFormatError(f"{path}: cannot decode ({exc})") from exc
    if data.shape[0] == 0 or data.shape[1] == 0:
        raise ImageFormatError("image dimension is 0")
    return data


def load_image(path) -> Image:
    """Read a raster file into an :class:`Image`.

    Binary PPM (P6) and PGM (P5) are decoded bit-exactly; grayscale files
    are replicated into three channels. Other formats go through Pillow when
    it is installed.
    """
    data = _read_raster(path)
    if data.ndim == 3 and data.shape[2] == 1:
        data = np.repeat(data, 3, axis=2)
    return Image.from_uint8(data)


def load_gray(path) -> GrayImage:
    data = _read_raster(path)
    if data.shape[2] == 1:
        return GrayImage(data[:, :, 0] / 255.0)
    return to_gray(Image.from_uint8(data))


def _write_pnm(path, magic: bytes, data: np.ndarray) -> None:
    h, w = data.shape[:2]
    header = b"%s\n%d %d\n255\n" % (magic, w, h)
    with open(os.fspath(path), "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data, dtype=np.uint8).tobytes())


def save_image(img: Image, path) -> None:
    """Write ``img`` as a binary PPM (P6, maxval 255)."""
    _write_pnm(path, b"P6", img.to_uint8())


def save_gray(img: GrayImage, path) -> None:
    """Write ``img`` as a binary PGM (P5, maxval 255)."""
    _write_pnm(path, b"P5", img.to_uint8())
