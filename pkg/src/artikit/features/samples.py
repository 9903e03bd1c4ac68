"""Fixed-shape training/scoring samples assembled around anchor frames.

A sample is built at the temporal midpoint of a phone instance (plus an
optional perturbation of at most 40 ms): 11 MFCC frames (anchor +/- 5 at a
2-frame step) and 9 resampled ultrasound frames (anchor +/- 4 at a step
derived from the frame rate so the context window spans roughly 100 ms).
Out-of-range frame indices clamp to the stream edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..classes import CLASSES
from ..errors import UnsampleableError
from .resample import TARGET_SHAPE, resample_ultrasound_frame

AUDIO_CONTEXT = 5     # context frames per side, audio
ULTRA_CONTEXT = 4     # context frames per side, ultrasound
CONTEXT_SECONDS = 0.1
AUDIO_SHIFT = 0.010
MAX_PERTURBATION_MS = 40.0

AUDIO_STACK_SHAPE = (2 * AUDIO_CONTEXT + 1, 60)
ULTRA_STACK_SHAPE = (2 * ULTRA_CONTEXT + 1,) + TARGET_SHAPE


def _round_half_up(x: float) -> int:
    # plain "round" with ties away from zero toward +inf; pinned so that
    # anchor/step indices are identical across platforms
    return int(math.floor(x + 0.5))


def ultrasound_step(fps: float) -> int:
    """Frames between consecutive ultrasound context frames (>= 1)."""
    return max(1, _round_half_up(CONTEXT_SECONDS * fps / ULTRA_CONTEXT))


def audio_step() -> int:
    return _round_half_up(CONTEXT_SECONDS / AUDIO_SHIFT / AUDIO_CONTEXT)


@dataclass
class Sample:
    audio_stack: np.ndarray       # (11, 60) float32
    ultrasound_stack: np.ndarray  # (9, 63, 103) float32, values in [0, 1]
    label: str
    utterance_id: str
    anchor_time: float
    perturbation_ms: float = 0.0
    speaker_id: str = ""
    phone_index: int = -1

    @property
    def provenance(self) -> tuple[str, float, float]:
        return (self.utterance_id, self.anchor_time, self.perturbation_ms)

    @property
    def label_index(self) -> int:
        return CLASSES.index(self.label)


def build_sample(instance, utterance, mfcc_frames: np.ndarray,
                 perturbation_ms: float = 0.0) -> Sample:
    """Assemble one fixed-shape sample for a phone instance.

    ``mfcc_frames`` are the precomputed 60-dim frames for the whole
    utterance (see `extract_mfcc`).
    """
    if abs(perturbation_ms) > MAX_PERTURBATION_MS:
        raise ValueError(f"|perturbation| must be <= {MAX_PERTURBATION_MS} ms, got {perturbation_ms}")

    anchor_time = instance.midpoint + perturbation_ms / 1000.0

    audio_span = (0.0, utterance.audio.duration)
    ultra_span = utterance.ultrasound.span()
    in_audio = audio_span[0] <= anchor_time <= audio_span[1]
    in_ultra = ultra_span[0] <= anchor_time <= ultra_span[1]
    if not (in_audio or in_ultra):
        raise UnsampleableError(
            f"anchor time {anchor_time:.3f}s outside audio {audio_span} and ultrasound {ultra_span} "
            f"for utterance {utterance.id!r}")

    ultra = utterance.ultrasound
    u_anchor = _round_half_up((anchor_time - ultra.first_frame_time) * ultra.fps)
    u_step = ultrasound_step(ultra.fps)
    u_idx = u_anchor + u_step * np.arange(-ULTRA_CONTEXT, ULTRA_CONTEXT + 1)
    u_idx = np.clip(u_idx, 0, ultra.num_frames - 1)
    ultra_stack = np.stack([resample_ultrasound_frame(ultra.frames[i]) for i in u_idx])

    a_anchor = _round_half_up(anchor_time / AUDIO_SHIFT)
    a_step = audio_step()
    a_idx = a_anchor + a_step * np.arange(-AUDIO_CONTEXT, AUDIO_CONTEXT + 1)
    a_idx = np.clip(a_idx, 0, mfcc_frames.shape[0] - 1)
    audio_stack = mfcc_frames[a_idx]

    return Sample(
        audio_stack=np.ascontiguousarray(audio_stack, dtype=np.float32),
        ultrasound_stack=np.ascontiguousarray(ultra_stack, dtype=np.float32),
        label=instance.cls,
        utterance_id=instance.utterance_id,
        anchor_time=anchor_time,
        perturbation_ms=float(perturbation_ms),
        speaker_id=instance.speaker_id,
        phone_index=instance.index,
    )


@dataclass(frozen=True)
class BalancePolicy:
    """Per-class sample cap and the anchor perturbation limit for up-sampling."""

    per_class_cap: int = 1000
    perturbation_limit_ms: float = MAX_PERTURBATION_MS


def balance_training_set(samples, policy: BalancePolicy, seed: int, rebuild) -> list[Sample]:
    """Cap over-represented classes and up-sample under-represented ones.

    Classes above the cap are uniformly subsampled. Classes below it gain
    perturbed copies built by ``rebuild(sample, perturbation_ms)``, visiting
    instances round-robin until the cap is reached or every instance has
    been used ceil(cap / n) times. Classes absent from ``samples`` stay
    empty (nothing to rebuild from). The result order is shuffled by seed.
    """
    rng = np.random.default_rng(seed)
    by_class: dict[str, list[Sample]] = {}
    for s in samples:
        by_class.setdefault(s.label, []).append(s)

    balanced: list[Sample] = []
    for cls in CLASSES:
        group = by_class.get(cls, [])
        if not group:
            continue
        cap = policy.per_class_cap
        if len(group) >= cap:
            keep = rng.permutation(len(group))[:cap]
            balanced.extend(group[i] for i in keep)
            continue
        balanced.extend(group)
        max_uses = math.ceil(cap / len(group))
        uses = [1] * len(group)
        order = rng.permutation(len(group))
        added = 0
        target = cap - len(group)
        while added < target and any(u < max_uses for u in uses):
            for i in order:
                if added >= target:
                    break
                if uses[i] >= max_uses:
                    continue
                pert = 0.0
                while pert == 0.0:
                    pert = rng.uniform(-policy.perturbation_limit_ms, policy.perturbation_limit_ms)
                balanced.append(rebuild(group[i], pert))
                uses[i] += 1
                added += 1

    final = rng.permutation(len(balanced))
    return [balanced[i] for i in final]


def samples_to_arrays(samples, dtype=np.float32):
    """Stack a sample list into (audio, ultrasound, label_index) arrays."""
    audio = np.stack([s.audio_stack for s in samples]).astype(dtype, copy=False)
    ultra = np.stack([s.ultrasound_stack for s in samples]).astype(dtype, copy=False)
    labels = np.asarray([s.label_index for s in samples], dtype=np.int64)
    return audio, ultra, labels
