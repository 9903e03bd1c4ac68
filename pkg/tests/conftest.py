import sys
from pathlib import Path

import numpy as np

# allow `import oracles` from the tests directory
sys.path.insert(0, str(Path(__file__).parent))

from artikit.nnet import ArchitectureConfig


def tiny_arch(**over) -> ArchitectureConfig:
    """Reduced architecture for fast gradient and training tests."""
    defaults = dict(ultrasound_channels=9, ultrasound_height=12, ultrasound_width=14,
                    audio_frames=11, audio_dim=60, conv1_filters=4, conv2_filters=6,
                    kernel_size=3, audio_fc_width=16, hidden_fc_widths=(24, 24))
    defaults.update(over)
    return ArchitectureConfig(**defaults)


def random_batch(arch: ArchitectureConfig, n: int, seed: int = 0, dtype=np.float64):
    rng = np.random.default_rng(seed)
    audio = rng.normal(size=(n, arch.audio_frames, arch.audio_dim)).astype(dtype)
    ultra = rng.random(size=(n, arch.ultrasound_channels, arch.ultrasound_height,
                             arch.ultrasound_width)).astype(dtype)
    labels = rng.integers(0, arch.output_dim, size=n)
    return audio, ultra, labels


def separable_batch(arch: ArchitectureConfig, per_class: int, seed: int = 0,
                    dtype=np.float32, noise: float = 0.05):
    """Linearly separable synthetic features: class-dependent audio offset
    and a class-positioned bright band in the ultrasound."""
    rng = np.random.default_rng(seed)
    n = per_class * arch.output_dim
    audio = rng.normal(0, noise, size=(n, arch.audio_frames, arch.audio_dim))
    ultra = rng.random(size=(n, arch.ultrasound_channels, arch.ultrasound_height,
                             arch.ultrasound_width)) * noise
    labels = np.repeat(np.arange(arch.output_dim), per_class)
    for i, lab in enumerate(labels):
        audio[i, :, lab] += 2.0
        col = int(lab * arch.ultrasound_width / arch.output_dim)
        ultra[i, :, :, col:col + 2] += 0.8
    order = rng.permutation(n)
    return (audio[order].astype(dtype), np.clip(ultra[order], 0, 1).astype(dtype),
            labels[order])
