import numpy as np
import pytest

from artikit.errors import (
    EmptyInputError,
    IncompatibleArchitectureError,
    TrainingDivergedError,
)
from artikit.nnet import TrainConfig, finetune, init_model, predict_proba, train

from conftest import separable_batch, tiny_arch


def test_mode_defaults():
    assert (TrainConfig(mode="scratch").learning_rate, TrainConfig(mode="scratch").epochs) == (0.1, 200)
    assert (TrainConfig(mode="pooled").learning_rate, TrainConfig(mode="pooled").epochs) == (0.1, 50)
    assert (TrainConfig(mode="finetune").learning_rate, TrainConfig(mode="finetune").epochs) == (0.001, 100)
    cfg = TrainConfig(mode="pooled", epochs=7, learning_rate=0.3)
    assert (cfg.learning_rate, cfg.epochs) == (0.3, 7)
    with pytest.raises(ValueError):
        TrainConfig(mode="warmup")


def test_memorizes_single_minibatch():
    arch = tiny_arch()
    model = init_model(arch, seed=0)
    audio, ultra, labels = separable_batch(arch, per_class=4, seed=1, noise=0.4)
    batch = (audio[:32], ultra[:32], labels[:32])
    cfg = TrainConfig(mode="scratch", learning_rate=0.05, epochs=500, minibatch=32,
                      l2_weight=0.0, seed=0)
    best, log = train(model, batch, batch, cfg)
    probs = predict_proba(best, (batch[0], batch[1]))
    acc = (probs.argmax(axis=1) == batch[2]).mean()
    assert acc == 1.0
    assert len(log) == 500


def test_learns_separable_classes():
    arch = tiny_arch()
    model = init_model(arch, seed=0)
    tr = separable_batch(arch, per_class=12, seed=2)
    va = separable_batch(arch, per_class=4, seed=3)
    cfg = TrainConfig(mode="scratch", learning_rate=0.05, epochs=30, minibatch=32,
                      l2_weight=0.001, seed=0)
    best, log = train(model, tr, va, cfg)
    assert best.val_accuracy >= 0.95


def test_best_checkpoint_selection():
    arch = tiny_arch()
    model = init_model(arch, seed=0)
    tr = separable_batch(arch, per_class=6, seed=4)
    va = separable_batch(arch, per_class=2, seed=5)
    cfg = TrainConfig(mode="scratch", learning_rate=0.02, epochs=12, minibatch=16,
                      l2_weight=0.0, seed=1)
    best, log = train(model, tr, va, cfg)
    accs = [e.val_accuracy for e in log]
    assert best.val_accuracy == max(accs)
    assert best.epoch == accs.index(max(accs)) + 1  # earliest epoch wins ties


def test_deterministic_epoch_logs():
    arch = tiny_arch()
    tr = separable_batch(arch, per_class=4, seed=6)
    va = separable_batch(arch, per_class=2, seed=7)
    cfg = TrainConfig(mode="scratch", learning_rate=0.05, epochs=5, minibatch=16,
                      l2_weight=0.01, seed=3)
    best1, log1 = train(init_model(arch, seed=9), tr, va, cfg)
    best2, log2 = train(init_model(arch, seed=9), tr, va, cfg)
    assert [(e.epoch, e.train_loss, e.val_accuracy) for e in log1] == \
           [(e.epoch, e.train_loss, e.val_accuracy) for e in log2]
    for key in best1.params:
        np.testing.assert_array_equal(best1.params[key], best2.params[key])


def test_divergence_aborts_with_log():
    arch = tiny_arch()
    model = init_model(arch, seed=0)
    tr = separable_batch(arch, per_class=4, seed=8)
    va = separable_batch(arch, per_class=2, seed=9)
    cfg = TrainConfig(mode="scratch", learning_rate=1e18, epochs=10, minibatch=16,
                      l2_weight=0.0, seed=0)
    with np.errstate(all="ignore"), pytest.raises(TrainingDivergedError):
        train(model, tr, va, cfg)


def test_empty_validation_rejected():
    arch = tiny_arch()
    model = init_model(arch, seed=0)
    tr = separable_batch(arch, per_class=2, seed=10)
    empty = (tr[0][:0], tr[1][:0], tr[2][:0])
    with pytest.raises(EmptyInputError):
        train(model, tr, empty, TrainConfig(mode="scratch", epochs=1))


def test_finetune_zero_epochs_is_noop():
    arch = tiny_arch()
    model = init_model(arch, seed=5)
    model.epoch = 17
    tr = separable_batch(arch, per_class=2, seed=11)
    out, log = finetune(model, tr, tr, TrainConfig(mode="finetune", epochs=0))
    assert log == []
    for key in model.params:
        np.testing.assert_array_equal(out.params[key], model.params[key])


def test_finetune_architecture_mismatch():
    model = init_model(tiny_arch(conv1_filters=4), seed=0)
    other = tiny_arch(conv1_filters=8)
    tr = separable_batch(tiny_arch(), per_class=1, seed=12)
    with pytest.raises(IncompatibleArchitectureError):
        finetune(model, tr, tr, TrainConfig(mode="finetune", epochs=1), arch=other)


def test_finetune_improves_over_scratch_on_small_child_set():
    # pretrain on a larger pool, then fine-tune on the small set; compare to
    # scratch training on the small set with the same budget
    arch = tiny_arch()
    pool = separable_batch(arch, per_class=20, seed=13)
    child = separable_batch(arch, per_class=3, seed=14)
    val = separable_batch(arch, per_class=3, seed=15)

    wins = []
    for seed in (0, 1, 2):
        pre, _ = train(init_model(arch, seed=seed), pool, val,
                       TrainConfig(mode="pooled", learning_rate=0.05, epochs=6,
                                   minibatch=32, l2_weight=0.001, seed=seed))
        tuned, _ = finetune(pre, child, val,
                            TrainConfig(mode="finetune", learning_rate=0.005, epochs=4,
                                        minibatch=32, l2_weight=0.001, seed=seed))
        scratch, _ = train(init_model(arch, seed=seed), child, val,
                           TrainConfig(mode="scratch", learning_rate=0.05, epochs=4,
                                       minibatch=32, l2_weight=0.001, seed=seed))
        wins.append(tuned.val_accuracy - scratch.val_accuracy)
    assert np.median(wins) >= 0.0
