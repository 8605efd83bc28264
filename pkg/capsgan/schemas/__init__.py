"""Pydantic schemas for networks, runs and reports."""

from capsgan.schemas.network import (
    CAPSULE_LATENT_DIM,
    IMAGE_SIZE,
    NOISE_DIM,
    ArchitectureId,
    FeedSource,
    NetworkSpec,
)
from capsgan.schemas.training import GanBatchLosses, GeneratorLoss, RunConfig
from capsgan.schemas.metrics import ScoreReport

__all__ = [
    "CAPSULE_LATENT_DIM",
    "IMAGE_SIZE",
    "NOISE_DIM",
    "ArchitectureId",
    "FeedSource",
    "NetworkSpec",
    "GanBatchLosses",
    "GeneratorLoss",
    "RunConfig",
    "ScoreReport",
]
