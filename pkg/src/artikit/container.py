"""Versioned binary container for named tensors plus a JSON metadata block.

Layout (all integers little-endian):

    magic   b"ARTK"
    u32     format version (currently 1)
    u32     header length, then UTF-8 JSON {"kind": ..., "meta": {...}}
    u32     tensor count
    per tensor:
        u32 + bytes   name (UTF-8)
        u32 + bytes   dtype string (numpy descr, little-endian, e.g. "<f4")
        u32           ndim, then u64 per dimension
        u64           payload byte count, then raw bytes
    32 bytes          SHA-256 over everything above

Used for model checkpoints and serialized sample sets; writes are
deterministic given identical content.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError

MAGIC = b"ARTK"
FORMAT_VERSION = 1


def _le_descr(arr: np.ndarray) -> tuple[str, np.ndarray]:
    dt = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
    if dt.byteorder == "=":
        dt = dt.newbyteorder("<")
    return dt.str, np.ascontiguousarray(arr, dtype=dt)


def write_container(path: Path, kind: str, meta: dict, tensors: dict[str, np.ndarray]) -> None:
    chunks = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    header = json.dumps({"kind": kind, "meta": meta}, sort_keys=True).encode("utf-8")
    chunks.append(struct.pack("<I", len(header)))
    chunks.append(header)
    chunks.append(struct.pack("<I", len(tensors)))
    for name in sorted(tensors):
        arr = tensors[name]
        descr, data = _le_descr(np.asarray(arr))
        name_b = name.encode("utf-8")
        descr_b = descr.encode("utf-8")
        chunks.append(struct.pack("<I", len(name_b)))
        chunks.append(name_b)
        chunks.append(struct.pack("<I", len(descr_b)))
        chunks.append(descr_b)
        chunks.append(struct.pack("<I", data.ndim))
        chunks.append(struct.pack(f"<{data.ndim}Q", *data.shape))
        raw = data.tobytes()
        chunks.append(struct.pack("<Q", len(raw)))
        chunks.append(raw)
    body = b"".join(chunks)
    digest = hashlib.sha256(body).digest()
    Path(path).write_bytes(body + digest)


class _Reader:
    def __init__(self, blob: bytes, path: Path):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise CheckpointError(f"truncated container file: {self.path}")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def read_container(path: Path) -> tuple[str, dict, dict[str, np.ndarray]]:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"no such file: {path}")
    blob = path.read_bytes()
    if len(blob) < len(MAGIC) + 4 + 32:
        raise CheckpointError(f"truncated container file: {path}")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError(f"digest mismatch (corrupt or truncated file): {path}")

    r = _Reader(body, path)
    if r.take(4) != MAGIC:
        raise CheckpointError(f"not a container file (bad magic): {path}")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported container version {version} in {path}")
    header = json.loads(r.take(r.u32()).decode("utf-8"))
    tensors: dict[str, np.ndarray] = {}
    for _ in range(r.u32()):
        name = r.take(r.u32()).decode("utf-8")
        descr = r.take(r.u32()).decode("utf-8")
        ndim = r.u32()
        shape = tuple(r.u64() for _ in range(ndim))
        nbytes = r.u64()
        data = np.frombuffer(r.take(nbytes), dtype=np.dtype(descr)).reshape(shape)
        tensors[name] = data.copy()
    return header["kind"], header["meta"], tensors
