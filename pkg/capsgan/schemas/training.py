"""Schemas for training runs and their per-step results."""

from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from capsgan.schemas.network import CAPSULE_LATENT_DIM, NOISE_DIM, ArchitectureId, FeedSource


class GeneratorLoss(str, Enum):
    NON_SATURATING = "non_saturating"
    MINIMAX = "minimax"


class GanBatchLosses(BaseModel):
    """Losses and mean discriminator scores of one training step."""

    step: int
    epoch: int
    d_loss: float
    g_loss: float
    d_real_mean: float
    d_fake_mean: float
    feed_source: Optional[FeedSource] = None  # capsgan2 only
    time_ms: float = 0.0


class RunConfig(BaseModel):
    """Fully resolved configuration of a training run."""

    model_config = ConfigDict(frozen=True)

    arch: ArchitectureId
    data: Path
    labels: Optional[Path] = None
    out: Path
    epochs: int = Field(gt=0)
    batch: int = Field(default=64, gt=0)
    seed: int = Field(default=42, ge=0)
    lr: float = Field(default=2e-4, gt=0)
    beta1: float = Field(default=0.5, gt=0, lt=1)
    beta2: float = Field(default=0.999, gt=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    routing_iters: int = Field(default=3, gt=0)
    g_loss: GeneratorLoss = GeneratorLoss.NON_SATURATING
    latent: Optional[int] = Field(default=None, gt=0)
    limit: Optional[int] = Field(default=None, gt=0)
    max_steps: Optional[int] = Field(default=None, gt=0)
    log_every: int = Field(default=1, gt=0)
    checkpoint_every: int = Field(default=500, gt=0)
    sample_every: int = Field(default=500, gt=0)
    sample_grid: int = Field(default=8, gt=0)
    feed_source: FeedSource = FeedSource.REAL
    wall_clock: bool = True

    @model_validator(mode="after")
    def _check_architecture(self) -> "RunConfig":
        required = CAPSULE_LATENT_DIM if self.arch == ArchitectureId.CAPSGAN3 else NOISE_DIM
        if self.latent is not None and self.latent != required:
            raise ValueError(f"{self.arch.value} latent length is fixed at {required}, got {self.latent}")
        if self.feed_source == FeedSource.GENERATED and self.arch != ArchitectureId.CAPSGAN2:
            raise ValueError("a generated DigitCaps feed only applies to capsgan2")
        return self

    def to_header(self) -> dict:
        """JSON-ready view echoed at the start of a run."""
        return self.model_dump(mode="json")
