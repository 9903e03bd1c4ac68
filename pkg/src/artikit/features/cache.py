"""Optional on-disk MFCC cache, one file per utterance.

File layout: magic b"MFCC", u32 frame count, u32 dimension, then
little-endian float32 frames. Files are keyed by utterance id plus a
digest of the MfccConfig, so changing the front end invalidates the cache.
Frames are stored (and returned) as float32; the sample builder consumes
float32 either way, so cached and uncached pipelines produce identical
samples.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import IngestionError
from .mfcc import MfccConfig, extract_mfcc

MAGIC = b"MFCC"


def write_mfcc_file(path: Path, frames: np.ndarray) -> None:
    frames = np.ascontiguousarray(frames, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", frames.shape[0], frames.shape[1]))
        fh.write(frames.tobytes())


def read_mfcc_file(path: Path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise IngestionError(f"not an MFCC cache file: {path}")
    count, dim = struct.unpack("<II", blob[4:12])
    expected = 12 + 4 * count * dim
    if len(blob) != expected:
        raise IngestionError(f"truncated MFCC cache file: {path}")
    return np.frombuffer(blob[12:], dtype="<f4").reshape(count, dim).copy()


class MfccCache:
    """get_or_compute() returns float32 frames, reading the cache when present."""

    def __init__(self, directory: Path | None, config: MfccConfig):
        self.directory = Path(directory) if directory else None
        self.config = config
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, utterance_id: str) -> Path:
        return self.directory / f"{utterance_id}.{self.config.digest()}.mfcc"

    def get_or_compute(self, utterance) -> np.ndarray:
        if self.directory:
            path = self._path(utterance.id)
            if path.exists():
                return read_mfcc_file(path)
        frames = extract_mfcc(utterance.audio, self.config).astype(np.float32)
        if self.directory:
            write_mfcc_file(self._path(utterance.id), frames)
        return frames
