"""Adversarial losses with clamped logarithms."""

from capsgan.schemas.training import GeneratorLoss
from capsgan.tensor import F
from capsgan.tensor.tensor import Tensor
from capsgan.utils.exceptions import NumericalFailureError

LOG_CLAMP = 1e-7


def _safe_log(x: Tensor) -> Tensor:
    return F.log(F.clip(x, LOG_CLAMP, 1.0))


def _finite(loss: Tensor, name: str) -> Tensor:
    if not loss.is_finite():
        raise NumericalFailureError(f"{name} is not finite")
    return loss


def d_loss(scores_real: Tensor, scores_fake: Tensor) -> Tensor:
    """-mean(log D(x)) - mean(log(1 - D(G(z))))."""
    real = F.mean(_safe_log(scores_real))
    fake = F.mean(_safe_log(1.0 - scores_fake))
    return _finite(-(real + fake), "discriminator loss")


def g_loss(scores_fake: Tensor, variant: GeneratorLoss = GeneratorLoss.NON_SATURATING) -> Tensor:
    """
    Generator loss.

    minimax: mean(log(1 - D(G(z)))); non_saturating: -mean(log D(G(z))).
    """
    if GeneratorLoss(variant) == GeneratorLoss.MINIMAX:
        loss = F.mean(_safe_log(1.0 - scores_fake))
    else:
        loss = -F.mean(_safe_log(scores_fake))
    return _finite(loss, "generator loss")
