import numpy as np
import pytest
from sklearn.base import clone

from artikit.classes import CLASSES
from artikit.estimator import ArticulationClassifier

from conftest import separable_batch, tiny_arch


def small_clf(**over):
    defaults = dict(conv1_filters=4, conv2_filters=6, kernel_size=3,
                    audio_fc_width=16, hidden_fc_width=24, learning_rate=0.05,
                    epochs=15, minibatch=32, l2_weight=0.001, seed=0)
    defaults.update(over)
    return ArticulationClassifier(**defaults)


def data(per_class, seed):
    arch = tiny_arch()
    audio, ultra, labels = separable_batch(arch, per_class=per_class, seed=seed)
    return (audio, ultra), np.asarray(CLASSES)[labels]


def test_fit_predict_accuracy():
    X, y = data(12, seed=0)
    Xte, yte = data(4, seed=1)
    clf = small_clf().fit(X, y)
    assert clf.score(Xte, yte) >= 0.9
    preds = clf.predict(Xte)
    assert set(preds) <= set(CLASSES)


def test_predict_proba_normalized():
    X, y = data(6, seed=2)
    clf = small_clf(epochs=3).fit(X, y)
    probs = clf.predict_proba(X)
    assert probs.shape == (len(y), 9)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_explicit_validation_set():
    X, y = data(8, seed=3)
    Xv, yv = data(2, seed=4)
    clf = small_clf(epochs=5).fit(X, y, validation=(Xv, yv))
    assert hasattr(clf, "model_")
    assert len(clf.history_) == 5


def test_sklearn_params_roundtrip_and_clone():
    clf = small_clf(epochs=7)
    params = clf.get_params()
    assert params["epochs"] == 7 and params["conv1_filters"] == 4
    cloned = clone(clf)
    assert cloned.get_params() == params
    clf.set_params(epochs=9)
    assert clf.epochs == 9


def test_unfitted_predict_rejected():
    with pytest.raises(RuntimeError):
        small_clf().predict_proba(data(1, seed=5)[0])


def test_label_indices_accepted():
    (audio, ultra), y = data(6, seed=6)
    idx = [CLASSES.index(lab) for lab in y]
    clf = small_clf(epochs=3).fit((audio, ultra), idx)
    assert clf.predict_proba((audio, ultra)).shape[0] == len(idx)


def test_bad_inputs_rejected():
    (audio, ultra), y = data(2, seed=7)
    clf = small_clf()
    with pytest.raises(ValueError):
        clf.fit((audio, ultra), ["nonsense"] * len(y))
    with pytest.raises(ValueError):
        clf.fit((audio[:3], ultra), y)
    bad = audio.copy()
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        clf.fit((bad, ultra), y)
