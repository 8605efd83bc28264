"""PrimaryCaps, DigitCaps, masking and generative routing."""

import numpy as np

from capsgan.capsules.routing import (
    DEFAULT_ITERATIONS,
    CapsuleBundle,
    dynamic_routing,
    predict_capsules,
    squash,
)
from capsgan.tensor import F, Module, conv2d, parameter
from capsgan.tensor.tensor import DTYPE, Tensor
from capsgan.utils.exceptions import ShapeError

# prediction weights large enough that routed capsules leave the quadratic
# region of squash at full width
CAPSULE_WEIGHT_STD = 0.25


def primary_caps(features: Tensor, dim: int = 8) -> CapsuleBundle:
    """
    Regroup a feature map into squashed capsules.

    Channels split into (channels / dim) capsule types of `dim` channels each; every
    type at every spatial position is one capsule, so 256 x 6 x 6 gives
    32 * 6 * 6 = 1152 capsules of dimension 8.
    """
    if features.ndim != 4 or features.shape[1] % dim:
        raise ShapeError("primary_caps", f"channels must split into capsules of dim {dim}", features=features.shape)
    batch, channels, height, width = features.shape
    grouped = F.reshape(features, (batch, channels // dim, dim, height, width))
    capsules = F.reshape(F.transpose(grouped, (0, 1, 3, 4, 2)), (batch, -1, dim))
    return CapsuleBundle(squash(capsules))


def capsules_to_feature_map(bundle: CapsuleBundle, height: int, width: int) -> Tensor:
    """Inverse regrouping of `primary_caps`: batch x (types*H*W) x dim -> batch x (types*dim) x H x W."""
    if bundle.count % (height * width):
        raise ShapeError("capsules_to_feature_map", f"{bundle.count} capsules do not tile {height}x{width}", values=bundle.values.shape)
    types = bundle.count // (height * width)
    grouped = F.reshape(bundle.values, (bundle.batch, types, height, width, bundle.dim))
    return F.reshape(F.transpose(grouped, (0, 1, 4, 2, 3)), (bundle.batch, types * bundle.dim, height, width))


def digit_caps(primary: CapsuleBundle, weights: Tensor, iterations: int = DEFAULT_ITERATIONS) -> CapsuleBundle:
    """Class capsules routed from primary capsules; their norms read as class-existence probabilities."""
    return dynamic_routing(predict_capsules(primary, weights), iterations)


def generative_routing(latent: CapsuleBundle, weights: Tensor, iterations: int = DEFAULT_ITERATIONS) -> CapsuleBundle:
    """Expand a few latent capsules into many by routing, the reverse of recognition."""
    return dynamic_routing(predict_capsules(latent, weights), iterations)


def mask_by_norm(digitcaps: CapsuleBundle) -> Tensor:
    """
    Vector of the longest capsule per batch element (batch x dim).

    Ties go to the lowest capsule index.
    """
    index = np.argmax(digitcaps.norms(), axis=1)
    return F.select_rows(digitcaps.values, index)


class PrimaryCaps(Module):
    """Convolution (no activation) followed by capsule regrouping and squash."""

    def __init__(self, in_channels: int, types: int, dim: int, rng: np.random.Generator,
                 kernel: int = 9, stride: int = 2):
        super().__init__()
        self.dim, self.stride = dim, stride
        self.weight = parameter(rng.normal(0.0, 0.02, (types * dim, in_channels, kernel, kernel)))
        self.bias = parameter(np.zeros(types * dim))

    def forward(self, x: Tensor) -> CapsuleBundle:
        return primary_caps(conv2d(x, self.weight, self.bias, stride=self.stride), self.dim)


class CapsuleRouting(Module):
    """Prediction weights for in_count x out_count capsule pairs; subclasses choose the routing op."""

    def __init__(self, in_count: int, out_count: int, in_dim: int, out_dim: int,
                 rng: np.random.Generator, iterations: int = DEFAULT_ITERATIONS):
        super().__init__()
        self.iterations = iterations
        self.weight = parameter(
            rng.normal(0.0, CAPSULE_WEIGHT_STD, (in_count, out_count, in_dim, out_dim)).astype(DTYPE)
        )

    def forward(self, capsules: CapsuleBundle) -> CapsuleBundle:
        raise NotImplementedError


class DigitCaps(CapsuleRouting):
    def forward(self, capsules: CapsuleBundle) -> CapsuleBundle:
        return digit_caps(capsules, self.weight, self.iterations)


class GenerativeRouting(CapsuleRouting):
    def forward(self, capsules: CapsuleBundle) -> CapsuleBundle:
        return generative_routing(capsules, self.weight, self.iterations)
