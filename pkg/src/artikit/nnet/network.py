"""The dual-stream classifier: parameter container, forward pass, loss and
analytic gradients.

Parameter tensors live in a flat name->array dict. The concatenation order
is ultrasound-conv features first, then audio FC features; checkpoints and
gradients rely on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelStateError, NumericError, ShapeMismatchError
from . import layers
from .config import ArchitectureConfig

# iteration order pinned for deterministic initialization and updates
PARAM_KEYS = (
    "conv1_W", "conv1_b",
    "conv2_W", "conv2_b",
    "audio_W", "audio_b",
    "bn_gamma", "bn_beta",
    "fc1_W", "fc1_b",
    "fc2_W", "fc2_b",
    "out_W", "out_b",
)

# tensors the L2 penalty covers (kernels and weight matrices only)
WEIGHT_KEYS = ("conv1_W", "conv2_W", "audio_W", "fc1_W", "fc2_W", "out_W")


@dataclass
class ModelState:
    """All trainable tensors plus batch-norm running statistics."""

    arch: ArchitectureConfig
    params: dict[str, np.ndarray]
    running_mean: np.ndarray | None
    running_var: np.ndarray | None
    epoch: int = 0
    val_accuracy: float | None = None
    seed: int | None = None

    def fingerprint(self) -> str:
        return self.arch.fingerprint()

    @property
    def dtype(self):
        return self.params["conv1_W"].dtype

    def copy(self) -> "ModelState":
        return ModelState(
            arch=self.arch,
            params={k: v.copy() for k, v in self.params.items()},
            running_mean=None if self.running_mean is None else self.running_mean.copy(),
            running_var=None if self.running_var is None else self.running_var.copy(),
            epoch=self.epoch,
            val_accuracy=self.val_accuracy,
            seed=self.seed,
        )


def _param_shapes(arch: ArchitectureConfig) -> dict[str, tuple]:
    k = arch.kernel_size
    h1, h2 = arch.hidden_fc_widths
    return {
        "conv1_W": (arch.conv1_filters, arch.ultrasound_channels, k, k),
        "conv1_b": (arch.conv1_filters,),
        "conv2_W": (arch.conv2_filters, arch.conv1_filters, k, k),
        "conv2_b": (arch.conv2_filters,),
        "audio_W": (arch.audio_input_size, arch.audio_fc_width),
        "audio_b": (arch.audio_fc_width,),
        "bn_gamma": (arch.concat_width,),
        "bn_beta": (arch.concat_width,),
        "fc1_W": (arch.concat_width, h1),
        "fc1_b": (h1,),
        "fc2_W": (h1, h2),
        "fc2_b": (h2,),
        "out_W": (h2, arch.output_dim),
        "out_b": (arch.output_dim,),
    }


def _fan_in(key: str, shape: tuple) -> int:
    if key.startswith("conv"):
        return shape[1] * shape[2] * shape[3]
    return shape[0]


def init_model(arch: ArchitectureConfig, seed: int = 0, dtype=np.float32) -> ModelState:
    """Fan-in-scaled uniform weights, zero biases, identity batch norm."""
    arch.conv_stack_dims()  # validates the geometry early
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for key, shape in _param_shapes(arch).items():
        if key.endswith("_b") or key == "bn_beta":
            params[key] = np.zeros(shape, dtype=dtype)
        elif key == "bn_gamma":
            params[key] = np.ones(shape, dtype=dtype)
        else:
            limit = np.sqrt(6.0 / _fan_in(key, shape))
            params[key] = rng.uniform(-limit, limit, size=shape).astype(dtype)
    width = arch.concat_width
    return ModelState(
        arch=arch,
        params=params,
        running_mean=np.zeros(width, dtype=dtype),
        running_var=np.ones(width, dtype=dtype),
        seed=seed,
    )


def as_batch(batch, arch: ArchitectureConfig, dtype):
    """Normalize a batch (Sample list or (audio, ultra) arrays) to arrays."""
    if isinstance(batch, (tuple, list)) and len(batch) == 2 and hasattr(batch[0], "shape"):
        audio, ultra = np.asarray(batch[0]), np.asarray(batch[1])
    else:
        audio = np.stack([s.audio_stack for s in batch])
        ultra = np.stack([s.ultrasound_stack for s in batch])
    expect_a = (arch.audio_frames, arch.audio_dim)
    expect_u = (arch.ultrasound_channels, arch.ultrasound_height, arch.ultrasound_width)
    if audio.ndim != 3 or audio.shape[1:] != expect_a:
        raise ShapeMismatchError(f"audio batch shape {audio.shape} does not match (N,)+{expect_a}")
    if ultra.ndim != 4 or ultra.shape[1:] != expect_u:
        raise ShapeMismatchError(f"ultrasound batch shape {ultra.shape} does not match (N,)+{expect_u}")
    if audio.shape[0] != ultra.shape[0]:
        raise ShapeMismatchError(f"audio batch has {audio.shape[0]} samples, ultrasound {ultra.shape[0]}")
    return audio.astype(dtype, copy=False), ultra.astype(dtype, copy=False)


def batch_labels(batch) -> np.ndarray:
    return np.asarray([s.label_index for s in batch], dtype=np.int64)


def _forward_pass(model: ModelState, audio: np.ndarray, ultra: np.ndarray,
                  train: bool, update_running: bool):
    p = model.params
    arch = model.arch
    if not train and (model.running_mean is None or model.running_var is None):
        raise ModelStateError("batch-norm running statistics missing; train first or load a checkpoint")

    n = ultra.shape[0]
    cache: dict = {"audio": audio, "ultra": ultra}
    c1 = layers.conv2d_forward(ultra, p["conv1_W"], p["conv1_b"])
    r1 = layers.relu_forward(c1)
    p1, idx1 = layers.maxpool_forward(r1, arch.pool_size)
    c2 = layers.conv2d_forward(p1, p["conv2_W"], p["conv2_b"])
    r2 = layers.relu_forward(c2)
    p2, idx2 = layers.maxpool_forward(r2, arch.pool_size)
    flat_u = p2.reshape(n, -1)

    flat_a = audio.reshape(n, -1)
    a1 = layers.dense_forward(flat_a, p["audio_W"], p["audio_b"])
    ra = layers.relu_forward(a1)

    concat = np.concatenate([flat_u, ra], axis=1)
    bn_out, bn_cache = layers.batchnorm_forward(
        concat, p["bn_gamma"], p["bn_beta"], model.running_mean, model.running_var,
        train=train, momentum=arch.bn_momentum, eps=arch.bn_eps, update_running=update_running)

    f1 = layers.dense_forward(bn_out, p["fc1_W"], p["fc1_b"])
    h1 = layers.relu_forward(f1)
    f2 = layers.dense_forward(h1, p["fc2_W"], p["fc2_b"])
    h2 = layers.relu_forward(f2)
    logits = layers.dense_forward(h2, p["out_W"], p["out_b"])

    if not np.isfinite(logits).all():
        raise NumericError(_diagnose_nonfinite(
            ("conv1", c1), ("conv2", c2), ("audio_fc", a1), ("concat_batchnorm", bn_out),
            ("hidden_fc1", f1), ("hidden_fc2", f2), ("output_fc", logits)))

    cache.update(c1=c1, p1=p1, idx1=idx1, r1_shape=r1.shape, c2=c2, p2_shape=p2.shape,
                 idx2=idx2, flat_a=flat_a, a1=a1, concat_split=flat_u.shape[1],
                 bn_cache=bn_cache, bn_train=train, bn_out=bn_out, f1=f1, h1=h1,
                 f2=f2, h2=h2)
    return logits, cache


def _diagnose_nonfinite(*named) -> str:
    for name, tensor in named:
        if not np.isfinite(tensor).all():
            return f"non-finite activation in layer {name!r}"
    return "non-finite activation"


def forward(model: ModelState, batch, mode: str = "infer"):
    """Posterior vectors (one 9-vector per sample).

    ``mode='train'`` normalizes with batch statistics and updates the
    running buffers; ``mode='infer'`` uses the running buffers.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    audio, ultra = as_batch(batch, model.arch, model.dtype)
    logits, _ = _forward_pass(model, audio, ultra, train=(mode == "train"),
                              update_running=(mode == "train"))
    return layers.softmax(logits)


def loss_and_gradients(model: ModelState, batch, labels=None, l2_weight: float = 0.0,
                       update_running: bool = True):
    """Mean cross-entropy + L2 penalty on weight tensors, with gradients.

    Runs the train-mode forward pass (batch statistics). Returns
    (loss, grads) where grads covers every key in PARAM_KEYS.
    """
    audio, ultra = as_batch(batch, model.arch, model.dtype)
    if labels is None:
        labels = batch_labels(batch)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != audio.shape[0]:
        raise ShapeMismatchError(f"{labels.shape[0]} labels for {audio.shape[0]} samples")
    if labels.shape[0] == 0:
        raise ShapeMismatchError("empty batch")

    p = model.params
    arch = model.arch
    logits, cache = _forward_pass(model, audio, ultra, train=True, update_running=update_running)
    loss, dlogits, _ = layers.cross_entropy(logits, labels)
    if l2_weight:
        loss = loss + l2_weight * 0.5 * sum(float((p[k].astype(np.float64) ** 2).sum())
                                            for k in WEIGHT_KEYS)
    if not np.isfinite(loss):
        raise NumericError("non-finite loss")

    grads: dict[str, np.ndarray] = {}
    dh2, grads["out_W"], grads["out_b"] = layers.dense_backward(dlogits, cache["h2"], p["out_W"])
    df2 = layers.relu_backward(dh2, cache["f2"])
    dh1, grads["fc2_W"], grads["fc2_b"] = layers.dense_backward(df2, cache["h1"], p["fc2_W"])
    df1 = layers.relu_backward(dh1, cache["f1"])
    dbn, grads["fc1_W"], grads["fc1_b"] = layers.dense_backward(df1, cache["bn_out"], p["fc1_W"])
    dconcat, grads["bn_gamma"], grads["bn_beta"] = layers.batchnorm_backward(dbn, cache["bn_cache"])

    split = cache["concat_split"]
    dflat_u, dra = dconcat[:, :split], dconcat[:, split:]

    da1 = layers.relu_backward(dra, cache["a1"])
    _, grads["audio_W"], grads["audio_b"] = layers.dense_backward(da1, cache["flat_a"], p["audio_W"])

    dp2 = dflat_u.reshape(cache["p2_shape"])
    dr2 = layers.maxpool_backward(dp2, cache["idx2"], cache["c2"].shape, arch.pool_size)
    dc2 = layers.relu_backward(dr2, cache["c2"])
    dp1, grads["conv2_W"], grads["conv2_b"] = layers.conv2d_backward(dc2, cache["p1"], p["conv2_W"])
    dr1 = layers.maxpool_backward(dp1, cache["idx1"], cache["r1_shape"], arch.pool_size)
    dc1 = layers.relu_backward(dr1, cache["c1"])
    _, grads["conv1_W"], grads["conv1_b"] = layers.conv2d_backward(dc1, cache["ultra"], p["conv1_W"])

    if l2_weight:
        for k in WEIGHT_KEYS:
            grads[k] = grads[k] + l2_weight * p[k]
    return loss, grads


def predict_proba(model: ModelState, samples, batch_size: int = 256) -> np.ndarray:
    """Infer-mode posteriors over a sample list or array pair, batched."""
    if isinstance(samples, (tuple, list)) and len(samples) == 2 and hasattr(samples[0], "shape"):
        audio, ultra = samples
        total = audio.shape[0]
        chunks = [(audio[s:s + batch_size], ultra[s:s + batch_size])
                  for s in range(0, total, batch_size)]
    else:
        chunks = [samples[s:s + batch_size] for s in range(0, len(samples), batch_size)]
    outputs = [forward(model, chunk, mode="infer") for chunk in chunks if _chunk_len(chunk)]
    if not outputs:
        return np.zeros((0, model.arch.output_dim), dtype=np.float64)
    return np.concatenate(outputs, axis=0)


def _chunk_len(chunk) -> int:
    if isinstance(chunk, tuple):
        return chunk[0].shape[0]
    return len(chunk)
