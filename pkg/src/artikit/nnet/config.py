"""Architecture and training configuration for the dual-stream classifier."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

from ..classes import NUM_CLASSES


@dataclass(frozen=True)
class ArchitectureConfig:
    """Shape of the dual-stream network.

    Ultrasound path: conv(kernel, conv1_filters) -> ReLU -> 2x2 max-pool ->
    conv(kernel, conv2_filters) -> ReLU -> pool -> flatten. Audio path:
    flatten -> FC(audio_fc_width) -> ReLU. The concatenated vector is batch
    normalized, passed through two ReLU FC layers and a final FC + softmax.

    Convolutions are valid/stride-1; pooling is stride-2 with floor
    semantics, so the default 63x103 input flows 59x99 -> 29x49 -> 25x45 ->
    12x22.
    """

    ultrasound_channels: int = 9
    ultrasound_height: int = 63
    ultrasound_width: int = 103
    audio_frames: int = 11
    audio_dim: int = 60
    conv1_filters: int = 32
    conv2_filters: int = 64
    kernel_size: int = 5
    pool_size: int = 2
    audio_fc_width: int = 256
    hidden_fc_widths: tuple[int, int] = (512, 512)
    output_dim: int = NUM_CLASSES
    bn_momentum: float = 0.9
    bn_eps: float = 1e-5

    def conv_stack_dims(self) -> list[tuple[int, int]]:
        """(H, W) after each of conv1, pool1, conv2, pool2; validates positivity."""
        k, p = self.kernel_size, self.pool_size
        h, w = self.ultrasound_height, self.ultrasound_width
        dims = []
        for stage in range(2):
            h, w = h - k + 1, w - k + 1
            dims.append((h, w))
            h, w = h // p, w // p
            dims.append((h, w))
            if h < 1 or w < 1 or (stage == 0 and (h < k or w < k)):
                raise ValueError(f"ultrasound input {self.ultrasound_height}x{self.ultrasound_width} "
                                 f"too small for kernel {k} / pool {p} (stage {stage + 1}: {h}x{w})")
        return dims

    @property
    def conv_output_size(self) -> int:
        h, w = self.conv_stack_dims()[-1]
        return self.conv2_filters * h * w

    @property
    def audio_input_size(self) -> int:
        return self.audio_frames * self.audio_dim

    @property
    def concat_width(self) -> int:
        return self.conv_output_size + self.audio_fc_width

    def fingerprint(self) -> str:
        """Digest of the canonical architecture description."""
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


MODE_DEFAULTS = {
    # mode: (learning_rate, epochs)
    "scratch": (0.1, 200),
    "pooled": (0.1, 50),
    "finetune": (0.001, 100),
}


@dataclass
class TrainConfig:
    """SGD settings; learning rate and epoch defaults depend on the mode."""

    mode: str = "scratch"
    learning_rate: float | None = None
    epochs: int | None = None
    minibatch: int = 128
    l2_weight: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODE_DEFAULTS:
            raise ValueError(f"mode must be one of {sorted(MODE_DEFAULTS)}, got {self.mode!r}")
        lr, epochs = MODE_DEFAULTS[self.mode]
        if self.learning_rate is None:
            self.learning_rate = lr
        if self.epochs is None:
            self.epochs = epochs
        if self.minibatch < 1:
            raise ValueError("minibatch must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
