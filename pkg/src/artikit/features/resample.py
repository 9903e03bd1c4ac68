"""Bilinear resampling of raw ultrasound frames.

Uses a corner-aligned sample grid: output pixel i maps to source
coordinate ``i * (S - 1) / (D - 1)``, so the four image corners are fixed
points and an identity-size resize is exact.
"""

from __future__ import annotations

import numpy as np

from ..errors import FrameShapeError

TARGET_SHAPE = (63, 103)


def bilinear_resize(frame: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    """Resize a 2-D image to ``out_shape`` with corner-aligned bilinear interpolation."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise FrameShapeError(f"expected a 2-D frame, got shape {frame.shape}")
    src_h, src_w = frame.shape
    if src_h <= 1 or src_w <= 1:
        raise FrameShapeError(f"source dimensions must be >= 2, got {frame.shape}")
    out_h, out_w = out_shape

    def axis_coords(src, dst):
        if dst == 1:
            pos = np.zeros(1)
        else:
            pos = np.arange(dst, dtype=np.float64) * (src - 1) / (dst - 1)
        lo = np.floor(pos).astype(np.intp)
        lo = np.minimum(lo, src - 2)
        return lo, pos - lo

    r0, tr = axis_coords(src_h, out_h)
    c0, tc = axis_coords(src_w, out_w)
    tr = tr[:, None]
    tc = tc[None, :]

    tl = frame[np.ix_(r0, c0)]
    tr_ = frame[np.ix_(r0, c0 + 1)]
    bl = frame[np.ix_(r0 + 1, c0)]
    br = frame[np.ix_(r0 + 1, c0 + 1)]
    top = tl * (1.0 - tc) + tr_ * tc
    bottom = bl * (1.0 - tc) + br * tc
    return top * (1.0 - tr) + bottom * tr


def resample_ultrasound_frame(frame: np.ndarray, out_shape: tuple[int, int] = TARGET_SHAPE) -> np.ndarray:
    """Resize a raw scanlines-by-echoes frame to 63x103 and scale to [0, 1]."""
    return bilinear_resize(frame, out_shape) / 255.0
