"""Discriminators: the capsule network and the DCGAN convolution stack."""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from capsgan.capsules import CapsuleBundle, DigitCaps, PrimaryCaps, mask_by_norm
from capsgan.networks.layers import BatchNorm, Conv, Dense, Dropout
from capsgan.schemas.network import NetworkSpec
from capsgan.tensor import F, Module
from capsgan.tensor.tensor import Tensor
from capsgan.utils.exceptions import ShapeError

ShapeTrace = List[Tuple[str, Tuple[int, ...]]]


@dataclass
class DiscriminatorOutput:
    """D(x) in (0, 1) per image plus the DigitCaps of capsule discriminators."""

    score: Tensor
    digitcaps: Optional[CapsuleBundle] = None

    def masked_digitcaps(self) -> Tensor:
        """Masked DigitCaps vector per image, cut from the discriminator's record."""
        if self.digitcaps is None:
            raise ShapeError("masked_digitcaps", "this discriminator has no DigitCaps layer")
        return mask_by_norm(self.digitcaps).detach()


def record(trace: Optional[ShapeTrace], label: str, x: Tensor) -> None:
    if trace is not None:
        trace.append((label, tuple(x.shape[1:])))


def _check_image(image: Tensor, size: int) -> None:
    if image.ndim != 4 or image.shape[1:] != (1, size, size):
        raise ShapeError("discriminator", f"images must be N x 1 x {size} x {size}", image=image.shape)


class CapsuleDiscriminator(Module):
    """
    Capsule network discriminator.

    conv 9x9 + LeakyReLU -> PrimaryCaps (conv 9x9 stride 2, squash) -> DigitCaps
    by routing -> mask by norm -> dense to 1 -> sigmoid.
    """

    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        super().__init__()
        self.spec = spec
        self.conv = Conv(1, spec.conv_channels, kernel=9, stride=1, pad=0, rng=rng)
        self.primary = PrimaryCaps(spec.conv_channels, spec.primary_types, spec.primary_dim, rng)
        self.digitcaps = DigitCaps(
            spec.primary_count, spec.digit_count, spec.primary_dim, spec.digit_dim,
            rng, iterations=spec.routing_iterations,
        )
        self.dense = Dense(spec.digit_dim, 1, rng)

    def forward(self, image: Tensor, rng: Optional[np.random.Generator] = None,
                trace: Optional[ShapeTrace] = None) -> DiscriminatorOutput:
        _check_image(image, self.spec.image_size)
        h = F.leaky_relu(self.conv(image))
        record(trace, "conv", h)
        primary = self.primary(h)
        if trace is not None:
            grid = self.spec.primary_grid
            trace.append(("primary", (self.spec.primary_types * self.spec.primary_dim, grid, grid)))
        digitcaps = self.digitcaps(primary)
        record(trace, "digitcaps", digitcaps.values)
        masked = mask_by_norm(digitcaps)
        record(trace, "mask", masked)
        score = F.sigmoid(self.dense(masked))
        record(trace, "dense", score)
        return DiscriminatorOutput(score=score, digitcaps=digitcaps)


class DcganDiscriminator(Module):
    """Four strided convolutions with dropout, then dense to 1 and sigmoid."""

    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        super().__init__()
        self.spec = spec
        self.convs = [
            Conv(1, 32, kernel=4, stride=2, pad=1, rng=rng),     # 28 -> 14
            Conv(32, 64, kernel=4, stride=2, pad=2, rng=rng),    # 14 -> 8
            Conv(64, 128, kernel=4, stride=2, pad=1, rng=rng),   # 8 -> 4
            Conv(128, 256, kernel=3, stride=1, pad=1, rng=rng),  # 4 -> 4
        ]
        self.norms = [BatchNorm(64), BatchNorm(128), BatchNorm(256)]
        self.dropout = Dropout()
        self.dense = Dense(256 * 4 * 4, 1, rng)

    def forward(self, image: Tensor, rng: Optional[np.random.Generator] = None,
                trace: Optional[ShapeTrace] = None) -> DiscriminatorOutput:
        _check_image(image, self.spec.image_size)
        h = image
        for index, conv in enumerate(self.convs):
            h = conv(h)
            if index > 0:
                h = self.norms[index - 1](h)
            h = self.dropout(F.leaky_relu(h), rng)
            record(trace, f"conv{index + 1}", h)
        score = F.sigmoid(self.dense(F.flatten(h)))
        record(trace, "dense", score)
        return DiscriminatorOutput(score=score)
