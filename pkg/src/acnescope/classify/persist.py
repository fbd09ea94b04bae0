"""Binary model container.

Layout (all integers little-endian)::

    offset  size  field
    0       4     magic b"TXKM"
    4       2     format version (u16)
    6       8     payload length N (u64)
    14      N     payload: UTF-8 JSON, sorted keys, no whitespace
    14+N    4     CRC-32 of the payload (u32)

Arrays inside the payload are objects ``{"__ndarray__": dtype, "shape": [...],
"data": base64 of the little-endian buffer}`` so floats survive bit-exactly.
"""

from __future__ import annotations

import base64
import json
import os
import struct
import zlib

import numpy as np

MAGIC = b"TXKM"
FORMAT_VERSION = 1
_HEAD = struct.Struct("<4sHQ")
_TAIL = struct.Struct("<I")


class ModelFormatError(ValueError):
    pass


class ModelVersionError(ModelFormatError):
    pass


def _encode(obj):
    if isinstance(obj, np.ndarray):
        arr = np.ascontiguousarray(obj)
        dt = arr.dtype.newbyteorder("<")
        return {
            "__ndarray__": dt.str,
            "shape": list(arr.shape),
            "data": base64.b64encode(arr.astype(dt).tobytes()).decode("ascii"),
        }
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            raw = base64.b64decode(obj["data"])
            return np.frombuffer(raw, dtype=np.dtype(obj["__ndarray__"])).reshape(obj["shape"]).copy()
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def dumps(document: dict) -> bytes:
    payload = json.dumps(_encode(document), sort_keys=True, separators=(",", ":"),
                         allow_nan=False).encode("utf-8")
    return _HEAD.pack(MAGIC, FORMAT_VERSION, len(payload)) + payload + _TAIL.pack(zlib.crc32(payload))


def loads(blob: bytes) -> dict:
    if len(blob) < _HEAD.size:
        raise ModelFormatError("truncated model file")
    magic, version, length = _HEAD.unpack_from(blob)
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"model format version {version} is not supported (expected {FORMAT_VERSION})")
    end = _HEAD.size + length
    if len(blob) != end + _TAIL.size:
        raise ModelFormatError("truncated model file")
    payload = blob[_HEAD.size:end]
    (crc,) = _TAIL.unpack_from(blob, end)
    if zlib.crc32(payload) != crc:
        raise ModelFormatError("model payload checksum mismatch")
    return _decode(json.loads(payload.decode("utf-8")))


def write(path, document: dict) -> None:
    with open(os.fspath(path), "wb") as fh:
        fh.write(dumps(document))


def read(path) -> dict:
    with open(os.fspath(path), "rb") as fh:
        return loads(fh.read())
