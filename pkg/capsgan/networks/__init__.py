"""Discriminator and generator networks for the four GAN architectures."""

from dataclasses import dataclass
from typing import Dict, Tuple, Type, Union

from pydantic import ValidationError

from capsgan.networks.discriminators import (
    CapsuleDiscriminator,
    DcganDiscriminator,
    DiscriminatorOutput,
    ShapeTrace,
)
from capsgan.networks.generators import CapsGen2Generator, CapsGen3Generator, DcganGenerator
from capsgan.networks.layers import BatchNorm, Conv, Deconv, Dense, Dropout
from capsgan.schemas.network import ArchitectureId, NetworkSpec
from capsgan.utils.exceptions import ArchitectureError
from capsgan.utils.seeding import Stream, stream_rng

__all__ = [
    "CapsuleDiscriminator",
    "DcganDiscriminator",
    "DiscriminatorOutput",
    "ShapeTrace",
    "CapsGen2Generator",
    "CapsGen3Generator",
    "DcganGenerator",
    "BatchNorm",
    "Conv",
    "Deconv",
    "Dense",
    "Dropout",
    "Gan",
    "ARCHITECTURES",
    "get_architecture",
    "build_gan",
    "resolve_spec",
]

Discriminator = Union[CapsuleDiscriminator, DcganDiscriminator]
Generator = Union[DcganGenerator, CapsGen2Generator, CapsGen3Generator]

# Architecture registry: (discriminator, generator) per id
ARCHITECTURES: Dict[ArchitectureId, Tuple[Type, Type]] = {
    ArchitectureId.DCGAN: (DcganDiscriminator, DcganGenerator),
    ArchitectureId.CAPSGAN1: (CapsuleDiscriminator, DcganGenerator),
    ArchitectureId.CAPSGAN2: (CapsuleDiscriminator, CapsGen2Generator),
    ArchitectureId.CAPSGAN3: (CapsuleDiscriminator, CapsGen3Generator),
}


@dataclass
class Gan:
    """A discriminator and generator pair built from one NetworkSpec."""

    spec: NetworkSpec
    discriminator: Discriminator
    generator: Generator

    @property
    def architecture(self) -> ArchitectureId:
        return self.spec.architecture

    def train(self) -> None:
        self.discriminator.train()
        self.generator.train()

    def eval(self) -> None:
        self.discriminator.eval()
        self.generator.eval()


def get_architecture(name: Union[str, ArchitectureId]) -> ArchitectureId:
    """Get an architecture id by name."""
    try:
        return ArchitectureId(name)
    except ValueError:
        raise ArchitectureError(
            f"Unknown architecture: {name}. Available: {[a.value for a in ARCHITECTURES]}",
            {"architecture": str(name)}
        )


def resolve_spec(architecture: Union[str, ArchitectureId], **overrides) -> NetworkSpec:
    """NetworkSpec for an architecture with optional width overrides."""
    try:
        return NetworkSpec(architecture=get_architecture(architecture), **overrides)
    except ValidationError as e:
        raise ArchitectureError(f"Invalid network configuration: {e.errors()[0]['msg']}", {"errors": str(e)})


def build_gan(spec: NetworkSpec, seed: int) -> Gan:
    """
    Build freshly initialized networks.

    The discriminator and the generator draw their weights from separate
    init streams, so either can be rebuilt alone.
    """
    discriminator_cls, generator_cls = ARCHITECTURES[spec.architecture]
    return Gan(
        spec=spec,
        discriminator=discriminator_cls(spec, stream_rng(seed, Stream.DISCRIMINATOR_INIT)),
        generator=generator_cls(spec, stream_rng(seed, Stream.GENERATOR_INIT)),
    )
