"""Dense float32 tensors with reverse-mode differentiation.

A `Tensor` wraps a numpy array. Every differentiable operation is a `Function`
subclass; applying one records the function as the creator of its output, so
the creators reachable from a loss form the computation record that
`backward` replays in reverse topological order.
"""

import threading
from contextlib import contextmanager
from typing import Any, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from capsgan.utils.exceptions import AutodiffUsageError, NumericalFailureError

DTYPE = np.float32

ArrayLike = Union[np.ndarray, float, int, Sequence[float]]

_state = threading.local()


def is_grad_enabled() -> bool:
    """Whether operations currently record themselves for backward."""
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable recording for the current thread."""
    previous = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def compute_dtype() -> type:
    """Element type of newly computed arrays on the current thread."""
    return getattr(_state, "dtype", DTYPE)


@contextmanager
def float64_precision(*tensors: "Tensor") -> Iterator[None]:
    """
    Compute in float64 on the current thread.

    `tensors` are widened for the duration and narrowed back to float32 on exit;
    float32 values survive the round trip exactly.
    """
    previous = compute_dtype()
    _state.dtype = np.float64
    for t in tensors:
        t.data = t.data.astype(np.float64)
    try:
        yield
    finally:
        _state.dtype = previous
        for t in tensors:
            t.data = t.data.astype(DTYPE)
            if t.grad is not None:
                t.grad = t.grad.astype(DTYPE)


class Function:
    """
    Base class for differentiable operations.

    Subclasses implement `forward` on numpy arrays and `backward`, which maps the
    gradient of the output to one gradient per input (None where an input needs
    no gradient).
    """

    def __init__(self, *inputs: "Tensor"):
        self.inputs = inputs

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no forward pass")

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError(f"{type(self).__name__} has no backward pass")

    @classmethod
    def apply(cls, *inputs: "Tensor", **kwargs: Any) -> "Tensor":
        """Run the forward pass and record the function on its output."""
        fn = cls(*inputs)
        out = fn.forward(*(t.data for t in inputs), **kwargs)
        requires_grad = is_grad_enabled() and any(t.requires_grad for t in inputs)
        return Tensor(out, requires_grad=requires_grad, creator=fn if requires_grad else None)

    @staticmethod
    def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        """Sum out broadcast dimensions so `grad` matches `shape`."""
        if grad.shape == shape:
            return grad
        while grad.ndim > len(shape):
            grad = grad.sum(axis=0)
        for axis, size in enumerate(shape):
            if size == 1 and grad.shape[axis] != 1:
                grad = grad.sum(axis=axis, keepdims=True)
        return grad


class Tensor:
    """A float32 array (float64 under `float64_precision`) that optionally tracks gradients."""

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        creator: Optional[Function] = None,
        name: Optional[str] = None,
    ):
        self.data = np.asarray(data, dtype=compute_dtype())
        self.requires_grad = requires_grad
        self.creator = creator
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self.creator is None

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def detach(self) -> "Tensor":
        """Same values, cut from the computation record."""
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    # Arithmetic is defined in capsgan.tensor.functional and attached below.

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


def as_tensor(value: Union["Tensor", ArrayLike]) -> Tensor:
    """Wrap constants so they can enter an operation."""
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data: ArrayLike, name: Optional[str] = None) -> Tensor:
    """A trainable leaf."""
    return Tensor(np.array(data, dtype=DTYPE), requires_grad=True, name=name)


def computation_record(root: Tensor) -> List[Tensor]:
    """
    Tensors reachable from `root` through recorded operations, in topological order.

    Every input of an entry appears before it, either as an output of an earlier
    entry or as a leaf.
    """
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]

    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if node.creator is not None:
            for parent in node.creator.inputs:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))

    return order


def backward(loss: Tensor) -> None:
    """
    Accumulate d(loss)/d(leaf) into `.grad` of every requires_grad leaf.

    Raises:
        AutodiffUsageError: loss is not a scalar or tracks no gradient
        NumericalFailureError: a leaf gradient contains NaN or Inf
    """
    if loss.size != 1:
        raise AutodiffUsageError(
            f"backward needs a scalar loss, got shape {loss.shape}",
            {"shape": list(loss.shape)}
        )
    if not loss.requires_grad:
        raise AutodiffUsageError("loss does not depend on any tensor that requires grad")

    grads = {id(loss): np.ones(loss.shape, dtype=compute_dtype())}

    for node in reversed(computation_record(loss)):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue

        if node.creator is None:
            if not np.all(np.isfinite(grad)):
                raise NumericalFailureError(
                    f"non-finite gradient for {node.name or 'leaf'} {node.shape}"
                )
            node.grad = grad.astype(compute_dtype()) if node.grad is None else node.grad + grad
            continue

        input_grads = node.creator.backward(grad)
        for parent, parent_grad in zip(node.creator.inputs, input_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + parent_grad
            else:
                grads[key] = parent_grad
