"""Squash, capsule prediction and routing by agreement."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from capsgan.tensor import F
from capsgan.tensor.tensor import Function, Tensor, compute_dtype
from capsgan.utils.exceptions import RoutingConfigError, ShapeError

SQUASH_EPS = 1e-8
DEFAULT_ITERATIONS = 3


@dataclass(frozen=True)
class CapsuleBundle:
    """A batch of capsules: values is batch x count x dim."""

    values: Tensor

    def __post_init__(self) -> None:
        if self.values.ndim != 3:
            raise ShapeError("capsules", "capsule values must be batch x count x dim", values=self.values.shape)

    @property
    def batch(self) -> int:
        return self.values.shape[0]

    @property
    def count(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values.data.astype(np.float64), axis=-1)


@dataclass
class RoutingState:
    """Snapshot of one routing iteration: logits b and coefficients c, both batch x in x out."""

    logits: np.ndarray
    coefficients: np.ndarray
    iteration: int


class Squash(Function):
    """v = |s|^2 / (1 + |s|^2) * s / (|s| + eps) along the last axis."""

    def forward(self, s, eps: float):
        s64 = s.astype(np.float64)
        n = np.sqrt(np.sum(s64 * s64, axis=-1, keepdims=True))
        q = 1.0 + n * n
        r = n + eps
        self.s, self.scale = s64, n * n / (q * r)
        # derivative of the scale divided by |s|; finite at s = 0
        self.slope = 2.0 / (q * q * r) - n / (q * r * r)
        return (self.scale * s64).astype(compute_dtype())

    def backward(self, grad):
        g = grad.astype(np.float64)
        along = np.sum(self.s * g, axis=-1, keepdims=True)
        return ((self.scale * g + self.slope * along * self.s).astype(compute_dtype()),)


class CapsulePredict(Function):
    """u_hat[b,i,j,:] = u[b,i,:] @ W[i,j,:,:] as one batched matmul per input capsule."""

    def forward(self, u, w):
        in_count, out_count, in_dim, out_dim = w.shape
        self.w_mat = np.ascontiguousarray(w.transpose(0, 2, 1, 3)).reshape(in_count, in_dim, out_count * out_dim)
        self.u_t = np.ascontiguousarray(u.transpose(1, 0, 2))  # in x batch x in_dim
        self.dims = (u.shape[0], in_count, out_count, out_dim, in_dim)
        out = self.u_t @ self.w_mat  # in x batch x out*out_dim
        return np.ascontiguousarray(out.reshape(in_count, -1, out_count, out_dim).transpose(1, 0, 2, 3))

    def backward(self, grad):
        batch, in_count, out_count, out_dim, in_dim = self.dims
        g = np.ascontiguousarray(grad.transpose(1, 0, 2, 3)).reshape(in_count, batch, out_count * out_dim)
        du = (g @ self.w_mat.transpose(0, 2, 1)).transpose(1, 0, 2)
        dw = (self.u_t.transpose(0, 2, 1) @ g).reshape(in_count, in_dim, out_count, out_dim).transpose(0, 2, 1, 3)
        return du.astype(compute_dtype()), np.ascontiguousarray(dw, dtype=compute_dtype())


def squash(s: Tensor, eps: float = SQUASH_EPS) -> Tensor:
    """Bound the norm of every capsule vector to [0, 1), keeping its direction."""
    return Squash.apply(s, eps=eps)


def predict_capsules(u: CapsuleBundle, weights: Tensor) -> Tensor:
    """
    Prediction vectors for every (input, output) capsule pair.

    Args:
        u: batch x in_count x in_dim capsules
        weights: in_count x out_count x in_dim x out_dim

    Returns:
        batch x in_count x out_count x out_dim
    """
    if weights.ndim != 4 or weights.shape[0] != u.count or weights.shape[2] != u.dim:
        raise ShapeError("predict_capsules", "weights do not match the input capsules", u=u.values.shape, weights=weights.shape)
    return CapsulePredict.apply(u.values, weights)


def routing_softmax(logits: Tensor) -> Tensor:
    """Coupling coefficients: softmax of b over output capsules for each input capsule."""
    return F.softmax(logits, axis=-1)


def dynamic_routing(
    u_hat: Tensor,
    iterations: int = DEFAULT_ITERATIONS,
    trace: Optional[List[RoutingState]] = None,
) -> CapsuleBundle:
    """
    Route predictions to output capsules by agreement.

    b starts at zero; each iteration computes c = softmax(b), s_j = sum_i c_ij u_hat_j|i,
    v_j = squash(s_j), then b_ij += u_hat_j|i . v_j. Gradients flow through every
    iteration.

    Args:
        u_hat: batch x in_count x out_count x out_dim predictions
        iterations: number of routing iterations, at least 1
        trace: when given, receives one RoutingState per iteration

    Returns:
        batch x out_count x out_dim output capsules
    """
    if iterations < 1:
        raise RoutingConfigError(f"routing needs at least one iteration, got {iterations}", {"iterations": iterations})
    if u_hat.ndim != 4:
        raise ShapeError("dynamic_routing", "predictions must be batch x in x out x dim", u_hat=u_hat.shape)

    batch, in_count, out_count, _ = u_hat.shape
    logits = Tensor(np.zeros((batch, in_count, out_count), dtype=compute_dtype()))
    v = None

    for iteration in range(iterations):
        coefficients = routing_softmax(logits)
        v = squash(F.einsum("bij,bijd->bjd", coefficients, u_hat))
        if trace is not None:
            trace.append(RoutingState(logits.data.copy(), coefficients.data.copy(), iteration))
        if iteration < iterations - 1:
            logits = F.add(logits, F.einsum("bijd,bjd->bij", u_hat, v))

    return CapsuleBundle(v)
