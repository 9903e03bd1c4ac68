"""Model checkpoints: bit-exact round trip of ModelState via the tensor container."""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

from ..container import read_container, write_container
from ..errors import CheckpointError, IncompatibleArchitectureError
from .config import ArchitectureConfig
from .network import PARAM_KEYS, ModelState


def save_checkpoint(model: ModelState, path: Path) -> None:
    arch_dict = asdict(model.arch)
    arch_dict["hidden_fc_widths"] = list(arch_dict["hidden_fc_widths"])
    meta = {
        "fingerprint": model.fingerprint(),
        "architecture": arch_dict,
        "epoch": model.epoch,
        "val_accuracy": model.val_accuracy,
        "seed": model.seed,
    }
    # the file contract is little-endian 32-bit tensors; float64 models
    # (used in gradient tests) narrow on save
    tensors = {k: v.astype("<f4", copy=False) for k, v in model.params.items()}
    if model.running_mean is not None:
        tensors["running_mean"] = model.running_mean.astype("<f4", copy=False)
        tensors["running_var"] = model.running_var.astype("<f4", copy=False)
    write_container(path, "checkpoint", meta, tensors)


def load_checkpoint(path: Path, expect_arch: ArchitectureConfig | None = None) -> ModelState:
    kind, meta, tensors = read_container(path)
    if kind != "checkpoint":
        raise CheckpointError(f"{path} holds a {kind!r} container, not a checkpoint")
    arch_dict = dict(meta["architecture"])
    arch_dict["hidden_fc_widths"] = tuple(arch_dict["hidden_fc_widths"])
    arch = ArchitectureConfig(**arch_dict)
    if arch.fingerprint() != meta["fingerprint"]:
        raise CheckpointError(f"architecture fingerprint mismatch in {path}")
    if expect_arch is not None and expect_arch.fingerprint() != arch.fingerprint():
        raise IncompatibleArchitectureError(
            f"checkpoint {path} was trained with a different architecture")

    missing = [k for k in PARAM_KEYS if k not in tensors]
    if missing:
        raise CheckpointError(f"checkpoint {path} is missing tensors: {missing}")
    params = {k: tensors[k] for k in PARAM_KEYS}
    running_mean = tensors.get("running_mean")
    running_var = tensors.get("running_var")
    if running_var is not None and not (running_var > 0).all():
        raise CheckpointError(f"checkpoint {path} carries non-positive running variance")
    return ModelState(
        arch=arch,
        params=params,
        running_mean=running_mean,
        running_var=running_var,
        epoch=int(meta["epoch"]),
        val_accuracy=meta["val_accuracy"],
        seed=meta["seed"],
    )
