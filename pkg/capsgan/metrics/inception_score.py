"""Inception Score over a matrix of class posteriors."""

import numpy as np

from capsgan.schemas.metrics import ScoreReport
from capsgan.utils.exceptions import ProbabilityMatrixError, UsageException

ROW_TOLERANCE = 1e-5


def validate_probabilities(probs: np.ndarray) -> np.ndarray:
    """
    Rows must be distributions: entries >= 0 and sums within 1e-5 of 1.

    Raises:
        ProbabilityMatrixError: otherwise
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] == 0 or probs.shape[1] == 0:
        raise ProbabilityMatrixError(f"need an N x K probability matrix, got shape {probs.shape}", {"shape": list(probs.shape)})
    if not np.all(np.isfinite(probs)) or np.any(probs < 0):
        raise ProbabilityMatrixError("probabilities must be finite and non-negative")
    deviation = np.abs(probs.sum(axis=1) - 1.0)
    worst = int(np.argmax(deviation))
    if deviation[worst] > ROW_TOLERANCE:
        raise ProbabilityMatrixError(
            f"row {worst} sums to {probs[worst].sum():.6f}, not 1",
            {"row": worst, "sum": float(probs[worst].sum())}
        )
    return probs


def _split_score(p_yx: np.ndarray) -> float:
    p_y = p_yx.mean(axis=0, keepdims=True)
    ratio = np.divide(p_yx, p_y, out=np.ones_like(p_yx), where=p_yx > 0)
    # 0 * log 0 := 0
    kl = np.where(p_yx > 0, p_yx * np.log(ratio), 0.0).sum(axis=1)
    return float(np.exp(kl.mean()))


def inception_score(probs: np.ndarray, splits: int = 10) -> ScoreReport:
    """
    exp(E_x KL(p(y|x) || p(y))) per split, with p(y) the split's column mean.

    Split k covers rows [k*N//splits, (k+1)*N//splits). The report carries the mean
    and population standard deviation over splits.

    Raises:
        UsageException: splits < 1 or more splits than rows
        ProbabilityMatrixError: rows are not distributions
    """
    probs = validate_probabilities(probs)
    n, k = probs.shape
    if splits < 1 or n < splits:
        raise UsageException(f"need 1 <= splits <= N, got splits={splits} for N={n}", {"splits": splits, "n": n})

    scores = [_split_score(probs[i * n // splits:(i + 1) * n // splits]) for i in range(splits)]
    return ScoreReport(
        split_scores=scores,
        mean=float(np.mean(scores)),
        std=float(np.std(scores)),
        n=n,
        k=k,
        splits=splits,
    )
