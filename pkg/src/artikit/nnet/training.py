"""Minibatch SGD with per-epoch validation and best-checkpoint selection."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, IncompatibleArchitectureError, NumericError, TrainingDivergedError
from .config import TrainConfig
from .network import ModelState, as_batch, batch_labels, loss_and_gradients, predict_proba

log = logging.getLogger(__name__)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_accuracy: float


def _extract(dataset, arch, dtype):
    """(audio, ultra, labels) arrays from a Sample list or a ready triple."""
    if isinstance(dataset, tuple) and len(dataset) == 3:
        audio, ultra, labels = dataset
        audio, ultra = as_batch((audio, ultra), arch, dtype)
        return audio, ultra, np.asarray(labels, dtype=np.int64)
    audio, ultra = as_batch(dataset, arch, dtype)
    return audio, ultra, batch_labels(dataset)


def accuracy(model: ModelState, audio, ultra, labels) -> float:
    probs = predict_proba(model, (audio, ultra))
    return float((probs.argmax(axis=1) == labels).mean())


def train(model: ModelState, train_set, validation_set, config: TrainConfig):
    """Run SGD from ``model`` and return (best state, per-epoch log).

    The returned state is the epoch maximizer of validation accuracy (ties
    broken toward the earliest epoch); the final partial minibatch of each
    epoch is kept. Non-finite loss aborts with TrainingDivergedError.
    """
    from .layers import tune_malloc
    tune_malloc()
    dtype = model.dtype
    tr_audio, tr_ultra, tr_labels = _extract(train_set, model.arch, dtype)
    if tr_labels.shape[0] == 0:
        raise EmptyInputError("training set is empty")
    if config.epochs > 0:
        va_audio, va_ultra, va_labels = _extract(validation_set, model.arch, dtype)
        if va_labels.shape[0] == 0:
            raise EmptyInputError("validation set is empty")

    state = model.copy()
    if config.epochs == 0:
        return state, []

    rng = np.random.default_rng(config.seed)
    n = tr_labels.shape[0]
    history: list[EpochStats] = []
    best_state = None
    best_acc = -1.0

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, config.minibatch):
            sel = order[start:start + config.minibatch]
            batch = (tr_audio[sel], tr_ultra[sel])
            try:
                loss, grads = loss_and_gradients(state, batch, tr_labels[sel],
                                                 l2_weight=config.l2_weight)
            except NumericError as exc:
                raise TrainingDivergedError(f"epoch {epoch}: {exc}", epoch_log=history) from exc
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"epoch {epoch}: loss is {loss}", epoch_log=history)
            for key, grad in grads.items():
                state.params[key] -= (config.learning_rate * grad).astype(dtype, copy=False)
            total_loss += float(loss) * len(sel)

        val_acc = accuracy(state, va_audio, va_ultra, va_labels)
        stats = EpochStats(epoch=epoch, train_loss=total_loss / n, val_accuracy=val_acc)
        history.append(stats)
        log.info("epoch %d: train_loss=%.4f val_accuracy=%.4f", epoch, stats.train_loss, val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            best_state = state.copy()
            best_state.epoch = epoch
            best_state.val_accuracy = val_acc
            best_state.seed = config.seed

    return best_state, history


def finetune(pretrained: ModelState, train_set, validation_set, config: TrainConfig | None = None,
             arch=None):
    """Continue training from a pretrained state at the fine-tune defaults."""
    if arch is not None and arch.fingerprint() != pretrained.arch.fingerprint():
        raise IncompatibleArchitectureError(
            "pretrained checkpoint architecture does not match the requested architecture")
    if config is None:
        config = TrainConfig(mode="finetune")
    return train(pretrained, train_set, validation_set, config)
