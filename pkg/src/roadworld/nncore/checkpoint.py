"""Parameter checkpoint file: magic "ADCP", store version, then
(name, shape, float32 data) records, all little-endian."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"ADCP"


def save_checkpoint(path, state: dict[str, np.ndarray], version: int = 0):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", version))
        f.write(struct.pack("<I", len(state)))
        for name, arr in state.items():
            arr = np.ascontiguousarray(arr, dtype="<f4")
            nb = name.encode("utf-8")
            f.write(struct.pack("<H", len(nb)))
            f.write(nb)
            f.write(struct.pack("<B", arr.ndim))
            for d in arr.shape:
                f.write(struct.pack("<I", d))
            f.write(arr.tobytes())


def load_checkpoint(path):
    """Returns (version, {name: float32 ndarray})."""
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a parameter checkpoint (magic {magic!r})")
        version = struct.unpack("<I", f.read(4))[0]
        count = struct.unpack("<I", f.read(4))[0]
        state = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", f.read(2))
            name = f.read(nlen).decode("utf-8")
            (ndim,) = struct.unpack("<B", f.read(1))
            shape = tuple(struct.unpack("<I", f.read(4))[0] for _ in range(ndim))
            n = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(f.read(4 * n), dtype="<f4").reshape(shape)
            state[name] = np.array(data)  # writable copy
    return version, state


def save_store(path, store):
    save_checkpoint(path, store.state_dict(), version=store.version)


def load_into_store(path, store, strict: bool = True) -> int:
    version, state = load_checkpoint(path)
    store.load_state_dict(state, strict=strict)
    store.version = version
    return version
