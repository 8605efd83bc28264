"""Batch normalization and dropout."""

from typing import Optional, Tuple

import numpy as np

from capsgan.tensor.functional import add, mul, reshape
from capsgan.tensor.tensor import Function, Tensor, compute_dtype
from capsgan.utils.exceptions import AutodiffUsageError, ShapeError

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


def _channel_view(x_ndim: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Reduction axes and broadcast shape for per-channel statistics on axis 1."""
    axes = (0,) + tuple(range(2, x_ndim))
    shape = (1, -1) + (1,) * (x_ndim - 2)
    return axes, shape


class BatchNormTrain(Function):
    """Normalize by batch statistics, then scale and shift per channel."""

    def forward(self, x, gamma, beta, eps: float):
        self.axes, shape = _channel_view(x.ndim)
        mean = x.mean(axis=self.axes, keepdims=True)
        var = x.var(axis=self.axes, keepdims=True)
        self.inv_std = (1.0 / np.sqrt(var + eps)).astype(compute_dtype())
        self.xhat = ((x - mean) * self.inv_std).astype(compute_dtype())
        self.gamma = gamma.reshape(shape)
        return self.xhat * self.gamma + beta.reshape(shape)

    def backward(self, grad):
        count = grad.size // grad.shape[1]
        dxhat = grad * self.gamma
        dx = (self.inv_std / count) * (
            count * dxhat
            - dxhat.sum(axis=self.axes, keepdims=True)
            - self.xhat * (dxhat * self.xhat).sum(axis=self.axes, keepdims=True)
        )
        dgamma = (grad * self.xhat).sum(axis=self.axes)
        dbeta = grad.sum(axis=self.axes)
        dtype = compute_dtype()
        return dx.astype(dtype), dgamma.astype(dtype), dbeta.astype(dtype)


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    eps: float = BN_EPS,
    momentum: float = BN_MOMENTUM,
) -> Tensor:
    """
    Per-channel batch normalization over axis 1 of an N x C x ... input.

    In training mode the batch mean and (biased) variance normalize the input and
    the running statistics are updated in place as
    running = momentum * running + (1 - momentum) * batch. In eval mode the
    running statistics normalize.
    """
    channels = x.shape[1] if x.ndim >= 2 else -1
    if x.ndim < 2 or x.shape[0] < 1 or gamma.shape != (channels,) or beta.shape != (channels,):
        raise ShapeError("batch_norm", "need N x C x ... input with C-vectors gamma and beta", input=x.shape, gamma=gamma.shape)
    if running_mean.shape != (channels,) or running_var.shape != (channels,):
        raise ShapeError("batch_norm", "running statistics do not match channels", input=x.shape, running=running_mean.shape)

    if training:
        out = BatchNormTrain.apply(x, gamma, beta, eps=eps)
        batch_mean, batch_var = _batch_stats(x.data)
        running_mean *= momentum
        running_mean += (1.0 - momentum) * batch_mean
        running_var *= momentum
        running_var += (1.0 - momentum) * batch_var
        return out

    _, shape = _channel_view(x.ndim)
    inv_std = (1.0 / np.sqrt(running_var + eps)).astype(compute_dtype())
    scale = mul(gamma, Tensor(inv_std))
    shift = add(beta, mul(scale, Tensor(-running_mean)))
    return add(mul(x, reshape(scale, shape)), reshape(shift, shape))


def _batch_stats(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    axes, _ = _channel_view(x.ndim)
    return x.mean(axis=axes), x.var(axis=axes)


def dropout(x: Tensor, rate: float, rng: Optional[np.random.Generator], training: bool) -> Tensor:
    """Inverted dropout: zero with probability `rate`, scale survivors by 1/(1-rate)."""
    if not training or rate <= 0.0:
        return x
    if rng is None:
        raise AutodiffUsageError("dropout in training mode needs a random generator")
    dtype = compute_dtype()
    keep = (rng.random(x.shape) >= rate).astype(dtype) / dtype(1.0 - rate)
    return mul(x, Tensor(keep))
