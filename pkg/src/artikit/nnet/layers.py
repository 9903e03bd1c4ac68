"""Layer forward/backward primitives.

Convolutions run as chunked im2col + GEMM; `conv2d_backward` rebuilds the
column buffers instead of caching them, trading a second copy pass for a
much smaller peak footprint on full-size batches.

Large intermediates are drawn from a thread-local scratch pool keyed by
shape: repeatedly faulting in fresh 100 MB allocations per minibatch costs
more than the arithmetic on small machines. Buffers are only reused within
a thread, so concurrent inference from separate threads stays safe.
"""

from __future__ import annotations

import threading

import numpy as np

CONV_CHUNK = 16

_scratch = threading.local()
_malloc_tuned = False


def tune_malloc() -> None:
    """Raise glibc's mmap/trim thresholds so ~100 MB layer buffers stay on
    the heap between minibatches instead of being re-faulted each step.
    No-op on non-glibc platforms; harmless to call repeatedly."""
    global _malloc_tuned
    if _malloc_tuned:
        return
    _malloc_tuned = True
    try:
        import ctypes
        libc = ctypes.CDLL("libc.so.6")
        libc.mallopt(-3, 1 << 30)   # M_MMAP_THRESHOLD
        libc.mallopt(-1, 1 << 30)   # M_TRIM_THRESHOLD
    except Exception:
        pass


def _buf(tag: str, shape: tuple, dtype) -> np.ndarray:
    pool = getattr(_scratch, "pool", None)
    if pool is None:
        pool = _scratch.pool = {}
    key = (tag, shape, np.dtype(dtype).str)
    buf = pool.get(key)
    if buf is None:
        buf = pool[key] = np.empty(shape, dtype)
    return buf


def _im2col(xs: np.ndarray, k: int, oh: int, ow: int, tag: str) -> np.ndarray:
    n, c = xs.shape[:2]
    m = oh * ow
    cols = _buf(tag, (CONV_CHUNK, c, k * k, m), xs.dtype)[:n]
    for di in range(k):
        for dj in range(k):
            cols[:, :, di * k + dj, :] = xs[:, :, di:di + oh, dj:dj + ow].reshape(n, c, m)
    return cols.reshape(n, c * k * k, m)


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid, stride-1 cross-correlation. x (B,C,H,W), w (F,C,K,K), b (F,)."""
    batch, _, h, wd = x.shape
    f, _, k, _ = w.shape
    oh, ow = h - k + 1, wd - k + 1
    m = oh * ow
    wm = w.reshape(f, -1)
    out = np.empty((batch, f, oh, ow), dtype=x.dtype)
    gemm_out = _buf("conv_fwd_out", (CONV_CHUNK, f, m), x.dtype)
    for s in range(0, batch, CONV_CHUNK):
        n = min(CONV_CHUNK, batch - s)
        cols = _im2col(x[s:s + n], k, oh, ow, "conv_fwd_cols")
        np.matmul(wm[None], cols, out=gemm_out[:n])
        out[s:s + n] = gemm_out[:n].reshape(n, f, oh, ow)
    out += b[None, :, None, None]
    return out


def conv2d_backward(dout: np.ndarray, x: np.ndarray, w: np.ndarray):
    batch, c, h, wd = x.shape
    f, _, k, _ = w.shape
    oh, ow = h - k + 1, wd - k + 1
    m = oh * ow
    wm = w.reshape(f, -1)
    dw = np.zeros_like(wm)
    dx = np.zeros_like(x)
    db = dout.sum(axis=(0, 2, 3))
    dcols_buf = _buf("conv_bwd_dcols", (CONV_CHUNK, c * k * k, m), x.dtype)
    for s in range(0, batch, CONV_CHUNK):
        n = min(CONV_CHUNK, batch - s)
        do = dout[s:s + n].reshape(n, f, m)
        cols = _im2col(x[s:s + n], k, oh, ow, "conv_bwd_cols")
        dw += np.matmul(do, cols.transpose(0, 2, 1)).sum(axis=0)
        dcols = dcols_buf[:n]
        np.matmul(wm.T[None], do, out=dcols)
        dcols4 = dcols.reshape(n, c, k * k, m)
        dxs = dx[s:s + n]
        for di in range(k):
            for dj in range(k):
                dxs[:, :, di:di + oh, dj:dj + ow] += dcols4[:, :, di * k + dj].reshape(n, c, oh, ow)
    return dx, dw.reshape(w.shape), db


def _pool_windows(x: np.ndarray, size: int, tag: str) -> np.ndarray:
    b, c, h, wd = x.shape
    oh, ow = h // size, wd // size
    windows = _buf(tag, (b, c, oh, ow, size * size), x.dtype)
    for ki in range(size):
        for kj in range(size):
            windows[..., ki * size + kj] = x[:, :, ki:oh * size:size, kj:ow * size:size]
    return windows


def maxpool_forward(x: np.ndarray, size: int):
    """2-D max pooling, stride = size, floor semantics (trailing rows/cols dropped)."""
    windows = _pool_windows(x, size, "pool_fwd")
    idx = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
    return out, idx


def maxpool_backward(dout: np.ndarray, idx: np.ndarray, x_shape, size: int) -> np.ndarray:
    b, c, h, wd = x_shape
    oh, ow = h // size, wd // size
    dwin = _buf("pool_bwd", (b, c, oh, ow, size * size), dout.dtype)
    dwin[...] = 0.0
    np.put_along_axis(dwin, idx[..., None], dout[..., None], axis=-1)
    dx = np.zeros(x_shape, dtype=dout.dtype)
    for ki in range(size):
        for kj in range(size):
            dx[:, :, ki:oh * size:size, kj:ow * size:size] = dwin[..., ki * size + kj]
    return dx


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return x @ w + b


def dense_backward(dout: np.ndarray, x: np.ndarray, w: np.ndarray):
    return dout @ w.T, x.T @ dout, dout.sum(axis=0)


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dout * (x > 0)


def batchnorm_forward(x, gamma, beta, running_mean, running_var, train: bool,
                      momentum: float, eps: float, update_running: bool):
    """1-D batch norm over the feature axis.

    In train mode the batch statistics normalize and (optionally) update the
    running buffers in place; in infer mode the running buffers normalize.
    """
    if train:
        mu = x.mean(axis=0)
        var = x.var(axis=0)
        if update_running:
            running_mean *= momentum
            running_mean += (1.0 - momentum) * mu
            running_var *= momentum
            running_var += (1.0 - momentum) * var
    else:
        mu, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv_std
    out = gamma * xhat + beta
    cache = (xhat, inv_std, gamma)
    return out, cache


def batchnorm_backward(dout, cache):
    xhat, inv_std, gamma = cache
    n = dout.shape[0]
    dgamma = (dout * xhat).sum(axis=0)
    dbeta = dout.sum(axis=0)
    dxhat = dout * gamma
    dx = (inv_std / n) * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
    return dx, dgamma, dbeta


def batchnorm_infer_backward(dout, cache):
    """Backward pass when normalization used fixed (running) statistics."""
    xhat, inv_std, gamma = cache
    dgamma = (dout * xhat).sum(axis=0)
    dbeta = dout.sum(axis=0)
    dx = dout * gamma * inv_std
    return dx, dgamma, dbeta


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy; returns (loss, dlogits, probs)."""
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    denom = e.sum(axis=1, keepdims=True)
    probs = e / denom
    log_probs = z - np.log(denom)
    loss = -log_probs[np.arange(n), labels].mean()
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits, probs
