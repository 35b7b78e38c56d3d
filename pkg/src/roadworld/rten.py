"""Raw tensor file format: magic "RTEN", u32 format version, u8 dtype code
(0 = float32), u8 ndim, ndim x u64 dims, then the row-major little-endian
payload."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"RTEN"
FORMAT_VERSION = 1
_DTYPES = {0: np.dtype("<f4")}
_CODES = {np.dtype("float32"): 0}


def write_rten(path, array: np.ndarray):
    array = np.ascontiguousarray(array, dtype="<f4")
    code = _CODES[np.dtype("float32")]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<B", code))
        f.write(struct.pack("<B", array.ndim))
        for d in array.shape:
            f.write(struct.pack("<Q", d))
        f.write(array.tobytes())


def _read_header(f, path):
    magic = f.read(4)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a raw tensor file (magic {magic!r})")
    (version,) = struct.unpack("<I", f.read(4))
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported raw tensor version {version}")
    (code,) = struct.unpack("<B", f.read(1))
    if code not in _DTYPES:
        raise ValueError(f"{path}: unknown dtype code {code}")
    (ndim,) = struct.unpack("<B", f.read(1))
    shape = tuple(struct.unpack("<Q", f.read(8))[0] for _ in range(ndim))
    return _DTYPES[code], shape, f.tell()


def read_rten(path) -> np.ndarray:
    path = Path(path)
    with open(path, "rb") as f:
        dtype, shape, _ = _read_header(f, path)
        n = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(f.read(dtype.itemsize * n), dtype=dtype)
    return np.array(data).reshape(shape)


def open_rten_memmap(path) -> np.ndarray:
    """Read-only memory map of the payload (fast random window access)."""
    path = Path(path)
    with open(path, "rb") as f:
        dtype, shape, offset = _read_header(f, path)
    return np.memmap(path, dtype=dtype, mode="r", offset=offset, shape=shape)
