"""Pydantic schemas describing the four GAN architectures."""

from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

IMAGE_SIZE = 28
NOISE_DIM = 100
CAPSULE_LATENT_DIM = 128


class ArchitectureId(str, Enum):
    """The structures compared: DCGAN and the three capsule variants."""

    DCGAN = "dcgan"
    CAPSGAN1 = "capsgan1"  # capsule discriminator, DCGAN generator
    CAPSGAN2 = "capsgan2"  # generator fed by masked DigitCaps of real images
    CAPSGAN3 = "capsgan3"  # generator expands latent capsules by routing


class FeedSource(str, Enum):
    """Where capsgan2 takes its DigitCaps input from."""

    REAL = "real"
    GENERATED = "generated"


class NetworkSpec(BaseModel):
    """Widths of every network; defaults reproduce the published tables."""

    model_config = ConfigDict(use_enum_values=False, frozen=True)

    architecture: ArchitectureId
    image_size: int = IMAGE_SIZE
    routing_iterations: int = Field(default=3, ge=1)
    conv_channels: int = Field(default=256, ge=1)
    primary_types: int = Field(default=32, ge=1)
    primary_dim: int = Field(default=8, ge=1)
    digit_count: int = Field(default=10, ge=1)
    digit_dim: int = Field(default=16, ge=1)
    noise_dim: int = Field(default=NOISE_DIM, ge=1)
    latent_capsules: int = Field(default=16, ge=1)
    latent_capsule_dim: int = Field(default=8, ge=1)
    routed_channels: Tuple[int, int, int] = (256, 128, 64)

    @model_validator(mode="after")
    def _check_image_size(self) -> "NetworkSpec":
        if self.image_size != IMAGE_SIZE:
            raise ValueError(f"only {IMAGE_SIZE}x{IMAGE_SIZE} grayscale architectures are defined")
        return self

    @property
    def capsule_discriminator(self) -> bool:
        return self.architecture != ArchitectureId.DCGAN

    @property
    def needs_digitcaps(self) -> bool:
        return self.architecture == ArchitectureId.CAPSGAN2

    @property
    def latent_dim(self) -> int:
        if self.architecture == ArchitectureId.CAPSGAN3:
            return self.latent_capsules * self.latent_capsule_dim
        return self.noise_dim

    @property
    def primary_grid(self) -> int:
        """Side of the PrimaryCaps map: 28 -> 20 (k9 s1) -> 6 (k9 s2)."""
        return ((self.image_size - 9 + 1) - 9) // 2 + 1

    @property
    def primary_count(self) -> int:
        return self.primary_types * self.primary_grid ** 2
