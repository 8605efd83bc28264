"""Dense float32 tensor arithmetic with reverse-mode differentiation."""

from capsgan.tensor.tensor import (
    DTYPE,
    Function,
    Tensor,
    as_tensor,
    backward,
    computation_record,
    compute_dtype,
    float64_precision,
    is_grad_enabled,
    no_grad,
    parameter,
)
from capsgan.tensor import functional as F
from capsgan.tensor.functional import activate, dense, matmul
from capsgan.tensor.conv import conv2d, conv_transpose2d, conv_output_size, conv_transpose_output_size
from capsgan.tensor.norm import batch_norm, dropout
from capsgan.tensor.module import Module

__all__ = [
    "DTYPE",
    "Function",
    "Tensor",
    "as_tensor",
    "backward",
    "computation_record",
    "compute_dtype",
    "float64_precision",
    "is_grad_enabled",
    "no_grad",
    "parameter",
    "F",
    "activate",
    "dense",
    "matmul",
    "conv2d",
    "conv_transpose2d",
    "conv_output_size",
    "conv_transpose_output_size",
    "batch_norm",
    "dropout",
    "Module",
]
