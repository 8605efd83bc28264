"""Inception Score and the surrogate scoring classifier."""

from capsgan.metrics.inception_score import inception_score, validate_probabilities
from capsgan.metrics.scorer import (
    ACCURACY_FLOORS,
    ScorerResult,
    SurrogateScorer,
    accuracy,
    cross_entropy,
    noise_images,
    score_images,
    score_samples,
    scorer_checkpoint,
    scorer_from_checkpoint,
    train_surrogate_scorer,
)

__all__ = [
    "inception_score",
    "validate_probabilities",
    "ACCURACY_FLOORS",
    "ScorerResult",
    "SurrogateScorer",
    "accuracy",
    "cross_entropy",
    "noise_images",
    "score_images",
    "score_samples",
    "scorer_checkpoint",
    "scorer_from_checkpoint",
    "train_surrogate_scorer",
]
