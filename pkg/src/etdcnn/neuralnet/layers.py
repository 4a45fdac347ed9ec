"""Forward and backward passes for the layer types used by the 1-D CNN.

Arrays follow the (samples, timesteps, channels) layout for sequence data and
(samples, features) after flattening. Every function here is pure; caching of
forward intermediates is the caller's job.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

ACTIVATIONS = ("relu", "sigmoid", "linear")


class NumericError(FloatingPointError):
    """A forward or backward pass produced NaN or Inf."""


class ShapeError(ValueError):
    pass


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ez = np.exp(x[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def activate(z, name: str):
    if name == "relu":
        return relu(z)
    if name == "sigmoid":
        return sigmoid(z)
    if name == "linear":
        return z
    raise ValueError(f"unknown activation {name!r}")


def activation_grad(dout, z, a, name: str):
    """Chain ``dout`` (gradient w.r.t. the activation output) back to ``z``."""
    if name == "relu":
        return dout * (z > 0)
    if name == "sigmoid":
        return dout * a * (1.0 - a)
    if name == "linear":
        return dout
    raise ValueError(f"unknown activation {name!r}")


def conv1d_forward(x, w, b):
    """Valid, stride-1 cross-correlation.

    ``x`` is (N, T, C_in), ``w`` is (K, C_in, F), ``b`` is (F,); the result is
    (N, T - K + 1, F) and has no activation applied.
    """
    x = np.asarray(x, dtype=np.float64)
    k, c_in, f = w.shape
    if x.ndim != 3 or x.shape[2] != c_in:
        raise ShapeError(f"conv1d expects input (N, T, {c_in}), got {x.shape}")
    if x.shape[1] < k:
        raise ShapeError(f"conv1d kernel {k} longer than input length {x.shape[1]}")
    cols = _im2col(x, k)
    return cols @ w.reshape(k * c_in, f) + b


def _im2col(x, k):
    n, t, c = x.shape
    # (N, T', C, K) -> (N, T', K, C) so the flattened order matches w.reshape(K*C, F)
    win = sliding_window_view(x, k, axis=1).transpose(0, 1, 3, 2)
    return win.reshape(n, t - k + 1, k * c)


def conv1d_backward(dout, x, w):
    """Return (dx, dw, db) for ``conv1d_forward`` given dL/d(output)."""
    k, c_in, f = w.shape
    n, t_out, _ = dout.shape
    cols = _im2col(x, k)
    dw = np.tensordot(cols, dout, axes=([0, 1], [0, 1])).reshape(k, c_in, f)
    db = dout.sum(axis=(0, 1))
    dcols = (dout @ w.reshape(k * c_in, f).T).reshape(n, t_out, k, c_in)
    dx = np.zeros_like(x, dtype=np.float64)
    for j in range(k):
        dx[:, j : j + t_out, :] += dcols[:, :, j, :]
    return dx, dw, db


def maxpool1d_forward(x, pool: int):
    """Non-overlapping max pooling along time; a trailing remainder is dropped.

    Returns the pooled array and the within-window argmax (lowest index wins
    ties), which :func:`maxpool1d_backward` needs.
    """
    x = np.asarray(x, dtype=np.float64)
    n, t, f = x.shape
    if pool < 1 or pool > t:
        raise ShapeError(f"pool size {pool} invalid for input length {t}")
    t_out = t // pool
    win = x[:, : t_out * pool, :].reshape(n, t_out, pool, f)
    arg = win.argmax(axis=2)
    out = np.take_along_axis(win, arg[:, :, None, :], axis=2)[:, :, 0, :]
    return out, arg


def maxpool1d_backward(dout, arg, input_shape, pool: int):
    n, t, f = input_shape
    t_out = dout.shape[1]
    dwin = np.zeros((n, t_out, pool, f))
    np.put_along_axis(dwin, arg[:, :, None, :], dout[:, :, None, :], axis=2)
    dx = np.zeros(input_shape)
    dx[:, : t_out * pool, :] = dwin.reshape(n, t_out * pool, f)
    return dx


def dense_forward(x, w, b):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeError(f"dense expects input (N, {w.shape[0]}), got {x.shape}")
    return x @ w + b


def dense_backward(dout, x, w):
    return dout @ w.T, x.T @ dout, dout.sum(axis=0)


def bce_loss(p, y, eps: float = 1e-12) -> float:
    """Mean binary cross-entropy with probabilities clipped to [eps, 1 - eps]."""
    p = np.clip(np.asarray(p, dtype=np.float64).reshape(-1), eps, 1.0 - eps)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def bce_sigmoid_grad(p, y, eps: float = 1e-12):
    """dL/dz for ``bce_loss(sigmoid(z), y)``; zero where the clip is active."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(p.shape)
    inside = (p > eps) & (p < 1.0 - eps)
    return np.where(inside, p - y, 0.0) / p.shape[0]
