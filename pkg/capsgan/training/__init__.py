"""Adversarial optimization."""

from capsgan.training.losses import LOG_CLAMP, d_loss, g_loss
from capsgan.training.optimizer import Adam, AdamState
from capsgan.training.sampling import (
    gan_from_checkpoint,
    generate_images,
    masked_digitcaps,
    sample_latent,
    spec_from_checkpoint,
)
from capsgan.training.trainer import (
    METRICS_HEADER,
    TrainingState,
    TrainResult,
    create_state,
    make_checkpoint,
    restore_optimizers,
    resume_state,
    train,
    train_step,
)

__all__ = [
    "LOG_CLAMP",
    "d_loss",
    "g_loss",
    "Adam",
    "AdamState",
    "gan_from_checkpoint",
    "generate_images",
    "masked_digitcaps",
    "sample_latent",
    "spec_from_checkpoint",
    "METRICS_HEADER",
    "TrainingState",
    "TrainResult",
    "create_state",
    "make_checkpoint",
    "restore_optimizers",
    "resume_state",
    "train",
    "train_step",
]
