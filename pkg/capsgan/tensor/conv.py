"""2-D convolution and transposed convolution with explicit zero padding.

Output sizes:
    conv2d:            H' = floor((H + 2*pad - k) / stride) + 1
    conv_transpose2d:  H' = (H - 1) * stride - 2*pad + k

conv_transpose2d is the linear adjoint of conv2d for the same kernels and
(k, stride, pad), so both share the same two kernels below.
"""

from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from capsgan.tensor.functional import add, reshape
from capsgan.tensor.tensor import Function, Tensor, compute_dtype
from capsgan.utils.exceptions import ShapeError


def conv_output_size(size: int, k: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - k) // stride + 1


def conv_transpose_output_size(size: int, k: int, stride: int, pad: int) -> int:
    return (size - 1) * stride - 2 * pad + k


def _windows(x: np.ndarray, k: int, stride: int, pad: int) -> np.ndarray:
    """Strided k x k patches of the padded input: N x C x H' x W' x k x k."""
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    out_h = (xp.shape[2] - k) // stride + 1
    out_w = (xp.shape[3] - k) // stride + 1
    win = sliding_window_view(xp, (k, k), axis=(2, 3))
    return win[:, :, : (out_h - 1) * stride + 1 : stride, : (out_w - 1) * stride + 1 : stride]


def _correlate(x: np.ndarray, w: np.ndarray, stride: int, pad: int) -> np.ndarray:
    """x: N x C x H x W, w: F x C x k x k -> N x F x H' x W'."""
    out = np.tensordot(_windows(x, w.shape[2], stride, pad), w, axes=([1, 4, 5], [1, 2, 3]))
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2), dtype=compute_dtype())


def _scatter(g: np.ndarray, w: np.ndarray, stride: int, pad: int, size: Tuple[int, int]) -> np.ndarray:
    """Adjoint of `_correlate` w.r.t. its input: g: N x F x H' x W', w: F x C x k x k -> N x C x H x W."""
    n, _, out_h, out_w = g.shape
    k = w.shape[2]
    h, wd = size
    cols = np.tensordot(g, w, axes=([1], [0]))  # N x H' x W' x C x k x k
    padded = np.zeros((n, w.shape[1], h + 2 * pad, wd + 2 * pad), dtype=compute_dtype())
    for i in range(k):
        for j in range(k):
            padded[:, :, i : i + stride * (out_h - 1) + 1 : stride, j : j + stride * (out_w - 1) + 1 : stride] += (
                cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            )
    return padded[:, :, pad : pad + h, pad : pad + wd]


def _kernel_grad(x: np.ndarray, g: np.ndarray, k: int, stride: int, pad: int) -> np.ndarray:
    """d(loss)/d(kernel) of `_correlate(x, w)` given its output gradient g -> F x C x k x k."""
    return np.tensordot(g, _windows(x, k, stride, pad), axes=([0, 2, 3], [0, 2, 3])).astype(compute_dtype())


class Conv2d(Function):
    def forward(self, x, w, stride: int, pad: int):
        self.x, self.w, self.stride, self.pad = x, w, stride, pad
        return _correlate(x, w, stride, pad)

    def backward(self, grad):
        dx = _scatter(grad, self.w, self.stride, self.pad, self.x.shape[2:])
        dw = _kernel_grad(self.x, grad, self.w.shape[2], self.stride, self.pad)
        return dx, dw


class ConvTranspose2d(Function):
    def forward(self, x, w, stride: int, pad: int):
        self.x, self.w, self.stride, self.pad = x, w, stride, pad
        k = w.shape[2]
        size = (
            conv_transpose_output_size(x.shape[2], k, stride, pad),
            conv_transpose_output_size(x.shape[3], k, stride, pad),
        )
        return np.ascontiguousarray(_scatter(x, w, stride, pad, size))

    def backward(self, grad):
        dx = _correlate(grad, self.w, self.stride, self.pad)
        dw = _kernel_grad(grad, self.x, self.w.shape[2], self.stride, self.pad)
        return dx, dw


def _check_common(op: str, x: Tensor, kernels: Tensor, stride: int, pad: int) -> None:
    if x.ndim != 4 or kernels.ndim != 4:
        raise ShapeError(op, "need N x C x H x W input and 4-D kernels", input=x.shape, kernels=kernels.shape)
    if kernels.shape[2] != kernels.shape[3]:
        raise ShapeError(op, "kernels must be square", kernels=kernels.shape)
    if stride < 1 or pad < 0:
        raise ShapeError(op, f"stride must be >= 1 and pad >= 0 (got {stride}, {pad})", input=x.shape)


def _batched(x: Tensor) -> Tuple[Tensor, bool]:
    if x.ndim == 3:
        return reshape(x, (1,) + x.shape), True
    return x, False


def _with_bias(out: Tensor, bias: Optional[Tensor]) -> Tensor:
    if bias is None:
        return out
    return add(out, reshape(bias, (1, -1, 1, 1)))


def conv2d(
    x: Tensor, kernels: Tensor, bias: Optional[Tensor] = None, stride: int = 1, pad: int = 0
) -> Tensor:
    """
    Cross-correlation with zero padding.

    Args:
        x: C x H x W or N x C x H x W input
        kernels: F x C x k x k
        bias: optional F-vector
        stride: step between windows
        pad: zero rows/columns added on each side

    Raises:
        ShapeError: channel mismatch or kernel larger than the padded input
    """
    x, single = _batched(x)
    _check_common("conv2d", x, kernels, stride, pad)
    k = kernels.shape[2]
    if x.shape[1] != kernels.shape[1]:
        raise ShapeError("conv2d", "input channels do not match kernels", input=x.shape, kernels=kernels.shape)
    if x.shape[2] + 2 * pad < k or x.shape[3] + 2 * pad < k:
        raise ShapeError("conv2d", "kernel larger than padded input", input=x.shape, kernels=kernels.shape)

    out = _with_bias(Conv2d.apply(x, kernels, stride=stride, pad=pad), bias)
    return reshape(out, out.shape[1:]) if single else out


def conv_transpose2d(
    x: Tensor, kernels: Tensor, bias: Optional[Tensor] = None, stride: int = 1, pad: int = 0
) -> Tensor:
    """
    Transposed convolution (the adjoint of conv2d with the same kernels).

    Args:
        x: C x H x W or N x C x H x W input
        kernels: C x F x k x k
        bias: optional F-vector

    Raises:
        ShapeError: channel mismatch or a non-positive output size
    """
    x, single = _batched(x)
    _check_common("conv_transpose2d", x, kernels, stride, pad)
    k = kernels.shape[2]
    if x.shape[1] != kernels.shape[0]:
        raise ShapeError("conv_transpose2d", "input channels do not match kernels", input=x.shape, kernels=kernels.shape)
    if min(conv_transpose_output_size(s, k, stride, pad) for s in x.shape[2:]) < 1:
        raise ShapeError("conv_transpose2d", "output size below 1", input=x.shape, kernels=kernels.shape)

    out = _with_bias(ConvTranspose2d.apply(x, kernels, stride=stride, pad=pad), bias)
    return reshape(out, out.shape[1:]) if single else out
