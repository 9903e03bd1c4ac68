"""Mel-frequency cepstral coefficient extraction.

The audio front-end: 25 ms Hamming windows every 10 ms over 16 kHz input,
26 triangular mel filters spanning 0-8 kHz, natural-log energies, an
orthonormal type-II DCT keeping 20 coefficients, and first/second
derivatives appended for a 60-dimensional frame.

Frame count for a signal of N samples is ``(N - window) // shift + 1``
(400/160 samples at the defaults), so a one-second signal yields 97 frames.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import AudioTooShortError, MetadataError

TARGET_RATE = 16000


@dataclass(frozen=True)
class MfccConfig:
    """Front-end configuration. Defaults give the pinned 60-dim frames.

    window_ms/shift_ms/num_ceps are part of the sample-shape contract and
    should not normally change; the remaining knobs (filter count,
    pre-emphasis, FFT size, delta regression window) are conventional
    defaults and overridable.
    """

    window_ms: float = 25.0
    shift_ms: float = 10.0
    num_ceps: int = 20
    num_mel_filters: int = 26
    preemphasis: float = 0.97
    fft_size: int = 512
    delta_window: int = 2
    low_hz: float = 0.0
    high_hz: float = 8000.0
    log_floor: float = 1e-10

    @property
    def frame_length(self) -> int:
        return int(round(self.window_ms / 1000.0 * TARGET_RATE))

    @property
    def frame_shift(self) -> int:
        return int(round(self.shift_ms / 1000.0 * TARGET_RATE))

    @property
    def feature_dim(self) -> int:
        return 3 * self.num_ceps

    def num_frames(self, num_samples: int) -> int:
        if num_samples < self.frame_length:
            return 0
        return (num_samples - self.frame_length) // self.frame_shift + 1

    def digest(self) -> str:
        """Short stable digest used to key feature caches."""
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(num_filters: int, fft_size: int, sample_rate: int,
                   low_hz: float, high_hz: float) -> np.ndarray:
    """Triangular mel filterbank, peak height 1, on rfft bin frequencies.

    Returns an array of shape (num_filters, fft_size // 2 + 1).
    """
    edges = mel_to_hz(np.linspace(hz_to_mel(low_hz), hz_to_mel(high_hz), num_filters + 2))
    bin_freqs = np.arange(fft_size // 2 + 1, dtype=np.float64) * sample_rate / fft_size
    bank = np.zeros((num_filters, bin_freqs.size), dtype=np.float64)
    for m in range(num_filters):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        rising = (bin_freqs - left) / (center - left)
        falling = (right - bin_freqs) / (right - center)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
    return bank


def _dct_matrix(num_ceps: int, num_filters: int) -> np.ndarray:
    # orthonormal type-II DCT, rows = coefficients
    n = np.arange(num_filters, dtype=np.float64)
    k = np.arange(num_ceps, dtype=np.float64)[:, None]
    mat = np.cos(np.pi * k * (2.0 * n + 1.0) / (2.0 * num_filters))
    mat *= np.sqrt(2.0 / num_filters)
    mat[0] *= np.sqrt(0.5)
    return mat


def delta_features(feats: np.ndarray, window: int) -> np.ndarray:
    """Least-squares local slope over +/-window frames with edge replication."""
    if feats.shape[0] == 0:
        return feats.copy()
    padded = np.pad(feats, ((window, window), (0, 0)), mode="edge")
    num = np.zeros_like(feats)
    for n in range(1, window + 1):
        num += n * (padded[window + n:window + n + feats.shape[0]]
                    - padded[window - n:window - n + feats.shape[0]])
    denom = 2.0 * sum(n * n for n in range(1, window + 1))
    return num / denom


def extract_mfcc(audio, config: MfccConfig | None = None) -> np.ndarray:
    """Compute 60-dim MFCC(+deltas) frames for a 16 kHz audio stream.

    ``audio`` is anything with ``samples`` and ``sample_rate`` attributes
    (see `artikit.corpus.AudioStream`), or a bare array assumed to be at
    16 kHz already.
    """
    cfg = config or MfccConfig()
    if hasattr(audio, "samples"):
        if audio.sample_rate != TARGET_RATE:
            raise MetadataError(f"extract_mfcc expects {TARGET_RATE} Hz audio, got {audio.sample_rate} Hz")
        x = np.asarray(audio.samples, dtype=np.float64)
    else:
        x = np.asarray(audio, dtype=np.float64)

    flen, shift = cfg.frame_length, cfg.frame_shift
    if x.size < flen:
        raise AudioTooShortError(f"audio has {x.size} samples, need at least {flen} for one window")

    # pre-emphasis over the whole signal, first sample replicated
    emph = np.empty_like(x)
    emph[0] = x[0] - cfg.preemphasis * x[0]
    emph[1:] = x[1:] - cfg.preemphasis * x[:-1]

    n_frames = cfg.num_frames(x.size)
    idx = np.arange(flen)[None, :] + shift * np.arange(n_frames)[:, None]
    frames = emph[idx] * np.hamming(flen)

    spectrum = np.fft.rfft(frames, n=cfg.fft_size)
    power = spectrum.real ** 2 + spectrum.imag ** 2

    bank = mel_filterbank(cfg.num_mel_filters, cfg.fft_size, TARGET_RATE, cfg.low_hz, cfg.high_hz)
    log_energies = np.log(np.maximum(power @ bank.T, cfg.log_floor))

    ceps = log_energies @ _dct_matrix(cfg.num_ceps, cfg.num_mel_filters).T
    d1 = delta_features(ceps, cfg.delta_window)
    d2 = delta_features(d1, cfg.delta_window)
    return np.hstack([ceps, d1, d2])
