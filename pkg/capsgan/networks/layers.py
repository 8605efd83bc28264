"""Parameterized layers over the functional tensor operations."""

from typing import Optional

import numpy as np

from capsgan.tensor import F, Module, batch_norm, conv2d, conv_transpose2d, dropout, parameter
from capsgan.tensor.tensor import Tensor

INIT_STD = 0.02
DROPOUT_RATE = 0.3


class Conv(Module):
    """Convolution with F x C x k x k kernels and a bias per output channel."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int, stride: int, pad: int,
                 rng: np.random.Generator):
        super().__init__()
        self.stride, self.pad = stride, pad
        self.weight = parameter(rng.normal(0.0, INIT_STD, (out_channels, in_channels, kernel, kernel)))
        self.bias = parameter(np.zeros(out_channels))

    def forward(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias, stride=self.stride, pad=self.pad)


class Deconv(Module):
    """Transposed convolution with C x F x k x k kernels and a bias per output channel."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int, stride: int, pad: int,
                 rng: np.random.Generator):
        super().__init__()
        self.stride, self.pad = stride, pad
        self.weight = parameter(rng.normal(0.0, INIT_STD, (in_channels, out_channels, kernel, kernel)))
        self.bias = parameter(np.zeros(out_channels))

    def forward(self, x: Tensor) -> Tensor:
        return conv_transpose2d(x, self.weight, self.bias, stride=self.stride, pad=self.pad)


class Dense(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.weight = parameter(rng.normal(0.0, INIT_STD, (in_features, out_features)))
        self.bias = parameter(np.zeros(out_features))

    def forward(self, x: Tensor) -> Tensor:
        return F.dense(x, self.weight, self.bias)


class BatchNorm(Module):
    """Per-channel batch normalization on axis 1 with running statistics as buffers."""

    def __init__(self, channels: int):
        super().__init__()
        self.gamma = parameter(np.ones(channels))
        self.beta = parameter(np.zeros(channels))
        self.register_buffer("running_mean", np.zeros(channels))
        self.register_buffer("running_var", np.ones(channels))

    def forward(self, x: Tensor) -> Tensor:
        return batch_norm(
            x, self.gamma, self.beta,
            self._buffers["running_mean"], self._buffers["running_var"],
            training=self.training,
        )


class Dropout(Module):
    def __init__(self, rate: float = DROPOUT_RATE):
        super().__init__()
        self.rate = rate

    def forward(self, x: Tensor, rng: Optional[np.random.Generator] = None) -> Tensor:
        return dropout(x, self.rate, rng, self.training)
