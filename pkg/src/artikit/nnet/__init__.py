from .config import ArchitectureConfig, TrainConfig
from .network import (
    ModelState,
    forward,
    init_model,
    loss_and_gradients,
    predict_proba,
)
from .training import EpochStats, finetune, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ArchitectureConfig",
    "TrainConfig",
    "ModelState",
    "init_model",
    "forward",
    "loss_and_gradients",
    "predict_proba",
    "train",
    "finetune",
    "EpochStats",
    "save_checkpoint",
    "load_checkpoint",
]
