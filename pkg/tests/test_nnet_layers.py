"""Finite-difference checks of each layer primitive at smooth points."""

import numpy as np
import pytest

from artikit.nnet import layers


def fd_grad(f, x, eps=1e-6):
    g = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_g = g.reshape(-1)
    for i in range(flat_x.size):
        orig = flat_x[i]
        flat_x[i] = orig + eps
        hi = f()
        flat_x[i] = orig - eps
        lo = f()
        flat_x[i] = orig
        flat_g[i] = (hi - lo) / (2 * eps)
    return g


def relerr(a, b):
    denom = max(np.abs(a).max(), np.abs(b).max(), 1e-12)
    return np.abs(a - b).max() / denom


def test_conv2d_gradients():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 2, 7, 8))
    w = rng.normal(size=(4, 2, 3, 3)) * 0.3
    b = rng.normal(size=4) * 0.1
    proj = rng.normal(size=(3, 4, 5, 6))

    def loss():
        return float((layers.conv2d_forward(x, w, b) * proj).sum())

    out = layers.conv2d_forward(x, w, b)
    assert out.shape == (3, 4, 5, 6)
    dx, dw, db = layers.conv2d_backward(proj, x, w)
    assert relerr(dx, fd_grad(loss, x)) < 1e-7
    assert relerr(dw, fd_grad(loss, w)) < 1e-7
    assert relerr(db, fd_grad(loss, b)) < 1e-7


def test_conv2d_matches_direct_convolution():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(2, 3, 6, 9))
    w = rng.normal(size=(5, 3, 4, 4))
    b = rng.normal(size=5)
    out = layers.conv2d_forward(x, w, b)
    # naive quadruple loop
    for bi in range(2):
        for f in range(5):
            for i in range(3):
                for j in range(6):
                    acc = b[f]
                    for c in range(3):
                        acc += (x[bi, c, i:i + 4, j:j + 4] * w[f, c]).sum()
                    assert out[bi, f, i, j] == pytest.approx(acc, rel=1e-10)


def test_maxpool_gradients_and_floor():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(2, 3, 7, 9))  # odd dims exercise floor cropping
    out, idx = layers.maxpool_forward(x, 2)
    assert out.shape == (2, 3, 3, 4)
    proj = rng.normal(size=out.shape)

    def loss():
        o, _ = layers.maxpool_forward(x, 2)
        return float((o * proj).sum())

    dx = layers.maxpool_backward(proj, idx, x.shape, 2)
    assert relerr(dx, fd_grad(loss, x)) < 1e-7
    # cropped rows/cols receive no gradient
    assert np.all(dx[:, :, 6, :] == 0)
    assert np.all(dx[:, :, :, 8] == 0)


def test_dense_and_relu_gradients():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 6)) + 0.3
    w = rng.normal(size=(6, 5))
    b = rng.normal(size=5)
    proj = rng.normal(size=(4, 5))

    def loss():
        return float((layers.relu_forward(layers.dense_forward(x, w, b)) * proj).sum())

    pre = layers.dense_forward(x, w, b)
    dpre = layers.relu_backward(proj, pre)
    dx, dw, db = layers.dense_backward(dpre, x, w)
    assert relerr(dx, fd_grad(loss, x)) < 1e-6
    assert relerr(dw, fd_grad(loss, w)) < 1e-6
    assert relerr(db, fd_grad(loss, b)) < 1e-6


def test_batchnorm_train_gradients():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(6, 5))
    gamma = rng.normal(size=5) + 1.0
    beta = rng.normal(size=5)
    proj = rng.normal(size=(6, 5))
    rm, rv = np.zeros(5), np.ones(5)

    def loss():
        out, _ = layers.batchnorm_forward(x, gamma, beta, rm.copy(), rv.copy(),
                                          train=True, momentum=0.9, eps=1e-5,
                                          update_running=False)
        return float((out * proj).sum())

    out, cache = layers.batchnorm_forward(x, gamma, beta, rm.copy(), rv.copy(),
                                          train=True, momentum=0.9, eps=1e-5,
                                          update_running=False)
    dx, dgamma, dbeta = layers.batchnorm_backward(proj, cache)
    assert relerr(dx, fd_grad(loss, x)) < 1e-6
    assert relerr(dgamma, fd_grad(loss, gamma)) < 1e-6
    assert relerr(dbeta, fd_grad(loss, beta)) < 1e-6
    # train-mode output is standardized
    assert np.allclose(out.mean(axis=0), beta, atol=1e-10)


def test_batchnorm_running_stats_update():
    rng = np.random.default_rng(5)
    x = rng.normal(loc=2.0, scale=3.0, size=(64, 4))
    rm, rv = np.zeros(4), np.ones(4)
    layers.batchnorm_forward(x, np.ones(4), np.zeros(4), rm, rv, train=True,
                             momentum=0.9, eps=1e-5, update_running=True)
    np.testing.assert_allclose(rm, 0.1 * x.mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(rv, 0.9 + 0.1 * x.var(axis=0), rtol=1e-12)


def test_cross_entropy_gradient_and_uniform_value():
    rng = np.random.default_rng(6)
    logits = rng.normal(size=(5, 9))
    labels = rng.integers(0, 9, size=5)
    loss, dlogits, probs = layers.cross_entropy(logits, labels)
    assert probs.shape == (5, 9)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def f():
        l, _, _ = layers.cross_entropy(logits, labels)
        return float(l)

    assert relerr(dlogits, fd_grad(f, logits)) < 1e-6
    # zero logits -> uniform -> loss = ln 9
    loss0, _, _ = layers.cross_entropy(np.zeros((3, 9)), np.array([0, 4, 8]))
    assert loss0 == pytest.approx(np.log(9.0), rel=1e-12)
