"""Media bundles for annotation items: word-bounded audio clip, a
log-magnitude spectrogram image, and the raw ultrasound frames rendered as
grayscale PNGs with their timestamps (the client synchronizes playback)."""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..errors import MediaRenderError

FRAME_PAD_SECONDS = 0.1
SPECTROGRAM_FLOOR = 1e-10


@dataclass
class MediaBundle:
    audio_wav: bytes
    spectrogram_png: bytes
    frame_pngs: list[bytes]
    frame_times: list[float]
    word_start: float
    word_end: float
    phone_start: float
    phone_end: float

    def timing(self) -> dict:
        return {
            "frame_times": self.frame_times,
            "word_start": self.word_start,
            "word_end": self.word_end,
            "phone_start": self.phone_start,
            "phone_end": self.phone_end,
            "duration": self.word_end - self.word_start,
        }


def _wav_bytes(samples: np.ndarray, rate: int) -> bytes:
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(np.asarray(samples, dtype="<i2").tobytes())
    return buf.getvalue()


def _png_bytes(gray: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(gray.astype(np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def spectrogram_image(samples: np.ndarray, rate: int = 16000) -> np.ndarray:
    """Log-magnitude STFT as a grayscale image, low frequencies at the bottom."""
    x = np.asarray(samples, dtype=np.float64)
    flen, shift, nfft = 400, 160, 512
    if x.size < flen:
        x = np.pad(x, (0, flen - x.size))
    n_frames = (x.size - flen) // shift + 1
    idx = np.arange(flen)[None, :] + shift * np.arange(n_frames)[:, None]
    spec = np.fft.rfft(x[idx] * np.hamming(flen), n=nfft)
    power = spec.real ** 2 + spec.imag ** 2
    logmag = np.log10(np.maximum(power, SPECTROGRAM_FLOOR))
    lo, hi = logmag.min(), logmag.max()
    if hi - lo < 1e-12:
        scaled = np.zeros_like(logmag)
    else:
        scaled = (logmag - lo) / (hi - lo) * 255.0
    return np.flipud(scaled.T)  # rows = frequency (low at bottom), cols = time


def render_media(utterance, item: dict) -> MediaBundle:
    """Build the bundle for one annotation item (see items.build_item_manifest)."""
    word_start = float(item["word_start"])
    word_end = float(item["word_end"])
    audio = utterance.audio
    ultra = utterance.ultrasound
    if not (0.0 <= word_start < word_end <= audio.duration + 1e-9):
        raise MediaRenderError(
            f"word interval [{word_start}, {word_end}] outside audio of {utterance.id!r}")

    lo = int(round(word_start * audio.sample_rate))
    hi = int(round(word_end * audio.sample_rate))
    clip = np.asarray(audio.samples[lo:hi])
    if clip.size == 0:
        raise MediaRenderError(f"empty audio clip for {utterance.id!r}")

    times = ultra.first_frame_time + np.arange(ultra.num_frames) / ultra.fps
    mask = (times >= word_start) & (times <= word_end)
    if not mask.any():
        raise MediaRenderError(
            f"no ultrasound frames inside [{word_start}, {word_end}] for {utterance.id!r}")
    frame_indices = np.flatnonzero(mask)
    pad_lo, pad_hi = word_start - FRAME_PAD_SECONDS, word_end + FRAME_PAD_SECONDS
    frame_times = [float(times[i]) for i in frame_indices]
    assert all(pad_lo <= t <= pad_hi for t in frame_times)

    # depth on the vertical axis reads like the clinical display
    frame_pngs = [_png_bytes(ultra.frames[i].T) for i in frame_indices]
    return MediaBundle(
        audio_wav=_wav_bytes(clip, audio.sample_rate),
        spectrogram_png=_png_bytes(spectrogram_image(clip, audio.sample_rate)),
        frame_pngs=frame_pngs,
        frame_times=frame_times,
        word_start=word_start,
        word_end=word_end,
        phone_start=float(item["phone_start"]),
        phone_end=float(item["phone_end"]),
    )
