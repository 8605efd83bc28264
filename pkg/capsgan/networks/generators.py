"""Generators: the DCGAN deconvolution stack and the two capsule generators."""

from typing import Optional

import numpy as np

from capsgan.capsules import CapsuleBundle, GenerativeRouting, capsules_to_feature_map
from capsgan.networks.discriminators import ShapeTrace, record
from capsgan.networks.layers import BatchNorm, Conv, Deconv, Dense
from capsgan.schemas.network import NetworkSpec
from capsgan.tensor import F, Module, parameter
from capsgan.tensor.tensor import Tensor
from capsgan.utils.exceptions import MissingDigitCapsSourceError, ShapeError

SEED_CHANNELS = 128
SEED_SIDE = 7


def _check_latent(op: str, z: Tensor, length: int) -> None:
    if z.ndim != 2 or z.shape[1] != length:
        raise ShapeError(op, f"latent vectors must have length {length}", z=z.shape)


class DcganTail(Module):
    """
    dense -> reshape 128x7x7 -> deconv 14x14 -> deconv 28x28 -> conv + tanh.

    The reshaped dense output feeds the first deconvolution directly; BN and ReLU
    follow each deconvolution only.
    """

    def __init__(self, in_features: int, rng: np.random.Generator):
        super().__init__()
        self.dense = Dense(in_features, SEED_CHANNELS * SEED_SIDE * SEED_SIDE, rng)
        self.deconv1 = Deconv(SEED_CHANNELS, 128, kernel=4, stride=2, pad=1, rng=rng)
        self.norm1 = BatchNorm(128)
        self.deconv2 = Deconv(128, 64, kernel=4, stride=2, pad=1, rng=rng)
        self.norm2 = BatchNorm(64)
        self.out = Conv(64, 1, kernel=3, stride=1, pad=1, rng=rng)

    def forward(self, x: Tensor, trace: Optional[ShapeTrace] = None) -> Tensor:
        h = self.dense(x)
        record(trace, "dense", h)
        h = F.reshape(h, (h.shape[0], SEED_CHANNELS, SEED_SIDE, SEED_SIDE))
        record(trace, "reshape", h)
        h = F.relu(self.norm1(self.deconv1(h)))
        record(trace, "deconv1", h)
        h = F.relu(self.norm2(self.deconv2(h)))
        record(trace, "deconv2", h)
        image = F.tanh(self.out(h))
        record(trace, "image", image)
        return image


class DcganGenerator(Module):
    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        super().__init__()
        self.spec = spec
        self.tail = DcganTail(spec.noise_dim, rng)

    def forward(self, z: Tensor, digitcaps: Optional[Tensor] = None,
                trace: Optional[ShapeTrace] = None) -> Tensor:
        _check_latent("dcgan_generator", z, self.spec.noise_dim)
        return self.tail(z, trace)


class CapsGen2Generator(Module):
    """
    Generator fed by a masked DigitCaps vector d and noise z.

    d (x) z is a digit_dim x noise_dim map; after BN + LeakyReLU a learned
    digit_dim-vector contracts the capsule axis back to noise_dim, followed by
    BN + LeakyReLU and the DCGAN tail. d is a constant input.
    """

    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        super().__init__()
        self.spec = spec
        self.product_norm = BatchNorm(spec.digit_dim)
        self.contraction = parameter(np.full(spec.digit_dim, 1.0 / spec.digit_dim))
        self.contraction_norm = BatchNorm(spec.noise_dim)
        self.tail = DcganTail(spec.noise_dim, rng)

    def forward(self, z: Tensor, digitcaps: Optional[Tensor] = None,
                trace: Optional[ShapeTrace] = None) -> Tensor:
        if digitcaps is None:
            raise MissingDigitCapsSourceError("generate images")
        _check_latent("capsgan2_generator", z, self.spec.noise_dim)
        if digitcaps.shape != (z.shape[0], self.spec.digit_dim):
            raise ShapeError("capsgan2_generator", "need one masked DigitCaps vector per latent sample",
                             digitcaps=digitcaps.shape, z=z.shape)
        d = digitcaps.detach()
        h = F.einsum("bi,bj->bij", d, z)
        h = F.leaky_relu(self.product_norm(h))
        record(trace, "multiply", h)
        h = F.einsum("bij,i->bj", h, self.contraction)
        h = F.leaky_relu(self.contraction_norm(h))
        record(trace, "weight", h)
        return self.tail(h, trace)


class CapsGen3Generator(Module):
    """
    Reverse of recognition: latent capsules are routed to PrimaryCaps-shaped
    capsules, regrouped into a feature map and upsampled by four deconvolutions.
    """

    def __init__(self, spec: NetworkSpec, rng: np.random.Generator):
        super().__init__()
        self.spec = spec
        self.routing = GenerativeRouting(
            spec.latent_capsules, spec.primary_count, spec.latent_capsule_dim, spec.primary_dim,
            rng, iterations=spec.routing_iterations,
        )
        c1, c2, c3 = spec.routed_channels
        map_channels = spec.primary_types * spec.primary_dim
        self.deconvs = [
            Deconv(map_channels, c1, kernel=6, stride=2, pad=0, rng=rng),  # 6 -> 16
            Deconv(c1, c2, kernel=5, stride=1, pad=0, rng=rng),            # 16 -> 20
            Deconv(c2, c3, kernel=5, stride=1, pad=0, rng=rng),            # 20 -> 24
            Deconv(c3, 1, kernel=5, stride=1, pad=0, rng=rng),             # 24 -> 28
        ]
        self.norms = [BatchNorm(c1), BatchNorm(c2), BatchNorm(c3)]

    def forward(self, z: Tensor, digitcaps: Optional[Tensor] = None,
                trace: Optional[ShapeTrace] = None) -> Tensor:
        spec = self.spec
        _check_latent("capsgan3_generator", z, spec.latent_dim)
        latent = CapsuleBundle(F.reshape(z, (z.shape[0], spec.latent_capsules, spec.latent_capsule_dim)))
        if trace is not None:
            trace.append(("latent", (spec.latent_capsule_dim, spec.latent_capsules)))
        routed = self.routing(latent)
        if trace is not None:
            trace.append(("routing", (spec.primary_dim, routed.count)))
        grid = spec.primary_grid
        h = capsules_to_feature_map(routed, grid, grid)
        record(trace, "reshape", h)
        for index, deconv in enumerate(self.deconvs):
            h = deconv(h)
            if index < len(self.norms):
                h = F.relu(self.norms[index](h))
            else:
                h = F.tanh(h)
            record(trace, f"deconv{index + 1}", h)
        return h
