"""Elementwise, reduction, shape and linear operations on tensors."""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from capsgan.tensor.tensor import Function, Tensor, as_tensor, compute_dtype
from capsgan.utils.exceptions import AutodiffUsageError, ShapeError

LEAKY_SLOPE = 0.2

Operand = Union[Tensor, float, int, np.ndarray]


class Add(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.shapes = (x.shape, y.shape)
        return x + y

    def backward(self, grad):
        return self.unbroadcast(grad, self.shapes[0]), self.unbroadcast(grad, self.shapes[1])


class Sub(Function):
    def forward(self, x, y):
        self.shapes = (x.shape, y.shape)
        return x - y

    def backward(self, grad):
        return self.unbroadcast(grad, self.shapes[0]), self.unbroadcast(-grad, self.shapes[1])


class Mul(Function):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x * y

    def backward(self, grad):
        return (
            self.unbroadcast(grad * self.y, self.x.shape),
            self.unbroadcast(grad * self.x, self.y.shape),
        )


class Div(Function):
    def forward(self, x, y):
        self.x, self.y = x, y
        return x / y

    def backward(self, grad):
        return (
            self.unbroadcast(grad / self.y, self.x.shape),
            self.unbroadcast(-grad * self.x / (self.y * self.y), self.y.shape),
        )


class Neg(Function):
    def forward(self, x):
        return -x

    def backward(self, grad):
        return (-grad,)


class Exp(Function):
    def forward(self, x):
        self.out = np.exp(x)
        return self.out

    def backward(self, grad):
        return (grad * self.out,)


class Log(Function):
    def forward(self, x):
        self.x = x
        return np.log(x)

    def backward(self, grad):
        return (grad / self.x,)


class Clip(Function):
    """Clamp to [low, high]; gradient passes only inside the interval."""

    def forward(self, x, low: float, high: float):
        self.inside = (x >= low) & (x <= high)
        return np.clip(x, low, high)

    def backward(self, grad):
        return (grad * self.inside,)


class Sum(Function):
    def forward(self, x, axis=None, keepdims: bool = False):
        self.shape, self.axis, self.keepdims = x.shape, axis, keepdims
        return np.sum(x, axis=axis, keepdims=keepdims, dtype=compute_dtype())

    def backward(self, grad):
        if self.axis is not None and not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad, self.shape).astype(compute_dtype()),)


class Reshape(Function):
    def forward(self, x, shape):
        self.shape = x.shape
        return x.reshape(shape)

    def backward(self, grad):
        return (grad.reshape(self.shape),)


class Transpose(Function):
    def forward(self, x, axes):
        self.inverse = np.argsort(axes)
        return np.ascontiguousarray(np.transpose(x, axes))

    def backward(self, grad):
        return (np.transpose(grad, self.inverse),)


class MatMul(Function):
    def forward(self, a, b):
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad):
        return grad @ self.b.T, self.a.T @ grad


class Einsum(Function):
    """Two-operand einsum whose operand indices all reach the other operand or the output."""

    def forward(self, a, b, subscripts: str):
        inputs, self.out_idx = subscripts.replace(" ", "").split("->")
        self.a_idx, self.b_idx = inputs.split(",")
        for own, other in ((self.a_idx, self.b_idx), (self.b_idx, self.a_idx)):
            if set(own) - set(other) - set(self.out_idx):
                raise AutodiffUsageError(f"einsum '{subscripts}' sums an index over one operand only")
        self.a, self.b = a, b
        return np.einsum(subscripts, a, b, optimize=True).astype(compute_dtype(), copy=False)

    def backward(self, grad):
        grad_a = np.einsum(f"{self.out_idx},{self.b_idx}->{self.a_idx}", grad, self.b, optimize=True)
        grad_b = np.einsum(f"{self.out_idx},{self.a_idx}->{self.b_idx}", grad, self.a, optimize=True)
        return grad_a.astype(compute_dtype(), copy=False), grad_b.astype(compute_dtype(), copy=False)


class SelectRows(Function):
    """out[b] = x[b, index[b]] for x of shape batch x count x dim."""

    def forward(self, x, index: np.ndarray):
        self.shape, self.index = x.shape, index
        return x[np.arange(x.shape[0]), index]

    def backward(self, grad):
        out = np.zeros(self.shape, dtype=compute_dtype())
        out[np.arange(self.shape[0]), self.index] = grad
        return (out,)


class Relu(Function):
    def forward(self, x):
        self.mask = x > 0
        return x * self.mask

    def backward(self, grad):
        return (grad * self.mask,)


class LeakyRelu(Function):
    def forward(self, x, alpha: float):
        dtype = compute_dtype()
        self.slope = np.where(x > 0, dtype(1.0), dtype(alpha))
        return x * self.slope

    def backward(self, grad):
        return (grad * self.slope,)


class Tanh(Function):
    def forward(self, x):
        self.out = np.tanh(x)
        return self.out

    def backward(self, grad):
        return (grad * (1.0 - self.out * self.out),)


class Sigmoid(Function):
    def forward(self, x):
        e = np.exp(-np.abs(x))
        self.out = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(compute_dtype())
        return self.out

    def backward(self, grad):
        return (grad * self.out * (1.0 - self.out),)


class Softmax(Function):
    """Max-subtracted softmax along one axis."""

    def forward(self, x, axis: int):
        self.axis = axis
        e = np.exp(x - np.max(x, axis=axis, keepdims=True))
        self.out = e / np.sum(e, axis=axis, keepdims=True)
        return self.out

    def backward(self, grad):
        dot = np.sum(grad * self.out, axis=self.axis, keepdims=True)
        return (self.out * (grad - dot),)


class LogSoftmax(Function):
    def forward(self, x, axis: int):
        self.axis = axis
        shifted = x - np.max(x, axis=axis, keepdims=True)
        out = shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
        self.probs = np.exp(out)
        return out

    def backward(self, grad):
        return (grad - self.probs * np.sum(grad, axis=self.axis, keepdims=True),)


def add(x: Operand, y: Operand) -> Tensor:
    return Add.apply(as_tensor(x), as_tensor(y))


def sub(x: Operand, y: Operand) -> Tensor:
    return Sub.apply(as_tensor(x), as_tensor(y))


def mul(x: Operand, y: Operand) -> Tensor:
    return Mul.apply(as_tensor(x), as_tensor(y))


def div(x: Operand, y: Operand) -> Tensor:
    return Div.apply(as_tensor(x), as_tensor(y))


def neg(x: Tensor) -> Tensor:
    return Neg.apply(x)


def exp(x: Tensor) -> Tensor:
    return Exp.apply(x)


def log(x: Tensor) -> Tensor:
    return Log.apply(x)


def clip(x: Tensor, low: float, high: float) -> Tensor:
    return Clip.apply(x, low=low, high=high)


def sum(x: Tensor, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> Tensor:
    return Sum.apply(x, axis=axis, keepdims=keepdims)


def mean(x: Tensor, axis: Optional[Union[int, Tuple[int, ...]]] = None, keepdims: bool = False) -> Tensor:
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    target = int(np.prod([s for s in shape if s != -1]))
    if (-1 not in shape and target != x.size) or (-1 in shape and x.size % max(target, 1)):
        raise ShapeError("reshape", f"cannot view {x.size} values as {shape}", input=x.shape)
    return Reshape.apply(x, shape=shape)


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    return Transpose.apply(x, axes=tuple(axes))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """c[i,j] = sum_p a[i,p] * b[p,j]."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", "inner dimensions do not match", a=a.shape, b=b.shape)
    return MatMul.apply(a, b)


def einsum(subscripts: str, a: Tensor, b: Tensor) -> Tensor:
    return Einsum.apply(a, b, subscripts=subscripts)


def select_rows(x: Tensor, index: np.ndarray) -> Tensor:
    if x.ndim != 3 or index.shape != (x.shape[0],):
        raise ShapeError("select_rows", "need batch x count x dim and one index per batch", x=x.shape)
    return SelectRows.apply(x, index=np.asarray(index, dtype=np.int64))


def dense(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Affine map x @ weight + bias."""
    if bias is not None and bias.shape != (weight.shape[-1],):
        raise ShapeError("dense", "bias does not match weight columns", weight=weight.shape, bias=bias.shape)
    out = matmul(x, weight)
    return out if bias is None else add(out, bias)


def relu(x: Tensor) -> Tensor:
    return Relu.apply(x)


def leaky_relu(x: Tensor, alpha: float = LEAKY_SLOPE) -> Tensor:
    return LeakyRelu.apply(x, alpha=alpha)


def tanh(x: Tensor) -> Tensor:
    return Tanh.apply(x)


def sigmoid(x: Tensor) -> Tensor:
    return Sigmoid.apply(x)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    return Softmax.apply(x, axis=axis)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    return LogSoftmax.apply(x, axis=axis)


ACTIVATIONS = ("relu", "leaky_relu", "tanh", "sigmoid")


def activate(x: Tensor, kind: str, alpha: float = LEAKY_SLOPE) -> Tensor:
    """Elementwise activation by name."""
    if kind == "relu":
        return relu(x)
    if kind == "leaky_relu":
        return leaky_relu(x, alpha)
    if kind == "tanh":
        return tanh(x)
    if kind == "sigmoid":
        return sigmoid(x)
    raise AutodiffUsageError(f"Unknown activation: {kind}. Available: {list(ACTIVATIONS)}")


def flatten(x: Tensor) -> Tensor:
    return reshape(x, (x.shape[0], -1))


Tensor.__add__ = add
Tensor.__radd__ = lambda self, other: add(other, self)
Tensor.__sub__ = sub
Tensor.__rsub__ = lambda self, other: sub(other, self)
Tensor.__mul__ = mul
Tensor.__rmul__ = lambda self, other: mul(other, self)
Tensor.__truediv__ = div
Tensor.__rtruediv__ = lambda self, other: div(other, self)
Tensor.__neg__ = neg
Tensor.__matmul__ = matmul
Tensor.sum = sum
Tensor.mean = mean
Tensor.reshape = lambda self, *shape: reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], (tuple, list)) else shape)
