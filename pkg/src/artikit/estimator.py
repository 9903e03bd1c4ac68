"""Scikit-learn style front door for the dual-stream classifier.

`ArticulationClassifier` wraps model initialization, SGD training with
validation-based checkpoint selection, and posterior inference behind the
usual fit/predict/predict_proba surface, so the network composes with
sklearn tooling (clone, grid search, pipelines over precomputed features).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .classes import CLASSES
from .nnet import ArchitectureConfig, TrainConfig, init_model, predict_proba, train
from .validation import check_feature_arrays, sample_labels_or_none, unpack_sample_input


class ArticulationClassifier(BaseEstimator, ClassifierMixin):
    """Dual-stream CNN classifier over (audio stack, ultrasound stack) pairs.

    X is either a list of `artikit.features.Sample` or a tuple
    ``(audio, ultrasound)`` of arrays shaped (N, 11, 60) and
    (N, 9, 63, 103); y holds class names or indices (omit it when X is a
    Sample list). A validation split drives best-epoch selection; pass
    ``validation=(X_val, y_val)`` to fit, or let ``validation_fraction``
    carve one out of the training data.
    """

    def __init__(self, conv1_filters=32, conv2_filters=64, kernel_size=5,
                 audio_fc_width=256, hidden_fc_width=512, learning_rate=0.1,
                 epochs=200, minibatch=128, l2_weight=0.1,
                 validation_fraction=0.1, seed=0):
        self.conv1_filters = conv1_filters
        self.conv2_filters = conv2_filters
        self.kernel_size = kernel_size
        self.audio_fc_width = audio_fc_width
        self.hidden_fc_width = hidden_fc_width
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.minibatch = minibatch
        self.l2_weight = l2_weight
        self.validation_fraction = validation_fraction
        self.seed = seed

    def _architecture(self, audio_shape, ultra_shape) -> ArchitectureConfig:
        return ArchitectureConfig(
            ultrasound_channels=ultra_shape[1], ultrasound_height=ultra_shape[2],
            ultrasound_width=ultra_shape[3], audio_frames=audio_shape[1],
            audio_dim=audio_shape[2], conv1_filters=self.conv1_filters,
            conv2_filters=self.conv2_filters, kernel_size=self.kernel_size,
            audio_fc_width=self.audio_fc_width,
            hidden_fc_widths=(self.hidden_fc_width, self.hidden_fc_width))

    def fit(self, X, y=None, validation=None):
        if y is None:
            y = sample_labels_or_none(X)
            if y is None:
                raise ValueError("y is required when X is not a Sample list")
        audio, ultra, labels = check_feature_arrays(*unpack_sample_input(X), y)

        if validation is not None:
            vx, vy = validation
            if vy is None:
                vy = sample_labels_or_none(vx)
            va, vu, vl = check_feature_arrays(*unpack_sample_input(vx), vy)
        else:
            n = audio.shape[0]
            n_val = max(1, int(round(self.validation_fraction * n)))
            if n_val >= n:
                raise ValueError(f"validation fraction {self.validation_fraction} leaves no training data")
            order = np.random.default_rng(self.seed).permutation(n)
            val_idx, train_idx = order[:n_val], order[n_val:]
            va, vu, vl = audio[val_idx], ultra[val_idx], labels[val_idx]
            audio, ultra, labels = audio[train_idx], ultra[train_idx], labels[train_idx]

        arch = self._architecture(audio.shape, ultra.shape)
        config = TrainConfig(mode="scratch", learning_rate=self.learning_rate,
                             epochs=self.epochs, minibatch=self.minibatch,
                             l2_weight=self.l2_weight, seed=self.seed)
        initial = init_model(arch, seed=self.seed)
        self.model_, self.history_ = train(initial, (audio, ultra, labels), (va, vu, vl), config)
        self.classes_ = np.asarray(CLASSES)
        self.n_features_in_ = audio.shape[1] * audio.shape[2]
        return self

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        audio, ultra, _ = check_feature_arrays(*unpack_sample_input(X))
        return predict_proba(self.model_, (audio, ultra))

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return self.classes_[probs.argmax(axis=1)]

    def score(self, X, y=None, sample_weight=None) -> float:
        if y is None:
            y = sample_labels_or_none(X)
        from .validation import check_labels
        labels = check_labels(y)
        probs = self.predict_proba(X)
        return float((probs.argmax(axis=1) == labels).mean())

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise RuntimeError("this ArticulationClassifier instance is not fitted yet")
