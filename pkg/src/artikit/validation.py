"""Input validation helpers shared by the estimator and pipeline entry points."""

from __future__ import annotations

import numpy as np

from .classes import CLASSES, CLASS_INDEX


def check_feature_arrays(audio, ultra, y=None):
    """Validate a (audio, ultrasound[, labels]) batch and return clean arrays.

    audio: (N, frames, dim); ultra: (N, channels, H, W); y: class names or
    indices. Shapes are checked for consistency and values for finiteness.
    """
    audio = np.asarray(audio, dtype=np.float32)
    ultra = np.asarray(ultra, dtype=np.float32)
    if audio.ndim != 3:
        raise ValueError(f"audio array must be 3-D (N, frames, dim), got shape {audio.shape}")
    if ultra.ndim != 4:
        raise ValueError(f"ultrasound array must be 4-D (N, channels, H, W), got shape {ultra.shape}")
    if audio.shape[0] != ultra.shape[0]:
        raise ValueError(f"audio and ultrasound batch sizes differ: {audio.shape[0]} vs {ultra.shape[0]}")
    if not np.isfinite(audio).all() or not np.isfinite(ultra).all():
        raise ValueError("input arrays contain non-finite values")
    if y is None:
        return audio, ultra, None
    labels = check_labels(y, audio.shape[0])
    return audio, ultra, labels


def check_labels(y, expected_len: int | None = None) -> np.ndarray:
    """Normalize labels (class names or indices) to an int64 index array."""
    y = list(y)
    if expected_len is not None and len(y) != expected_len:
        raise ValueError(f"expected {expected_len} labels, got {len(y)}")
    out = np.empty(len(y), dtype=np.int64)
    for i, label in enumerate(y):
        if isinstance(label, str):
            if label not in CLASS_INDEX:
                raise ValueError(f"unknown class label {label!r}")
            out[i] = CLASS_INDEX[label]
        else:
            idx = int(label)
            if not 0 <= idx < len(CLASSES):
                raise ValueError(f"class index {idx} out of range 0..{len(CLASSES) - 1}")
            out[i] = idx
    return out


def unpack_sample_input(X):
    """(audio, ultra) arrays from either a Sample list or an array pair."""
    if isinstance(X, (tuple, list)) and len(X) == 2 and hasattr(X[0], "shape"):
        return np.asarray(X[0]), np.asarray(X[1])
    if len(X) == 0:
        raise ValueError("empty sample list")
    audio = np.stack([s.audio_stack for s in X])
    ultra = np.stack([s.ultrasound_stack for s in X])
    return audio, ultra


def sample_labels_or_none(X):
    if isinstance(X, (tuple, list)) and len(X) == 2 and hasattr(X[0], "shape"):
        return None
    return [s.label for s in X]
