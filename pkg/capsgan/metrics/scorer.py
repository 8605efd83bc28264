"""Small MNIST-style classifier standing in for the Inception model."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from capsgan.data.batching import make_batches
from capsgan.data.checkpoint import ModelCheckpoint
from capsgan.data.idx import NUM_CLASSES, Dataset
from capsgan.metrics.inception_score import inception_score
from capsgan.networks.layers import Conv, Dense
from capsgan.schemas.metrics import ScoreReport
from capsgan.tensor import F, Module, backward, no_grad
from capsgan.tensor.tensor import DTYPE, Tensor
from capsgan.training.optimizer import Adam
from capsgan.training.sampling import gan_from_checkpoint, generate_images
from capsgan.utils.exceptions import CheckpointArchitectureError, InvalidRunConfigError, ScorerFloorError
from capsgan.utils.logger import get_logger
from capsgan.utils.seeding import Stream, stream_rng

logger = get_logger(__name__)

SCORER_KIND = "scorer"
ACCURACY_FLOORS = {"mnist": 0.97, "fashion": 0.85}


class SurrogateScorer(Module):
    """conv 5x5/2 + ReLU -> conv 5x5/2 + ReLU -> dense 1568 -> 10."""

    def __init__(self, rng: np.random.Generator, classes: int = NUM_CLASSES):
        super().__init__()
        self.conv1 = Conv(1, 16, kernel=5, stride=2, pad=2, rng=rng)   # 28 -> 14
        self.conv2 = Conv(16, 32, kernel=5, stride=2, pad=2, rng=rng)  # 14 -> 7
        self.dense = Dense(32 * 7 * 7, classes, rng)

    def forward(self, images: Tensor) -> Tensor:
        """Class logits."""
        h = F.relu(self.conv1(images))
        h = F.relu(self.conv2(h))
        return self.dense(F.flatten(h))

    def probabilities(self, images: np.ndarray, chunk: int = 100) -> np.ndarray:
        """Softmax rows p(y|x), computed without gradient."""
        out = []
        with no_grad():
            for start in range(0, len(images), chunk):
                out.append(F.softmax(self(Tensor(images[start:start + chunk])), axis=-1).data)
        return np.concatenate(out, axis=0)


@dataclass
class ScorerResult:
    scorer: SurrogateScorer
    accuracy: float
    floor: Optional[float] = None


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    one_hot = np.eye(logits.shape[1], dtype=DTYPE)[labels]
    return -F.sum(F.log_softmax(logits, axis=-1) * Tensor(one_hot)) / float(logits.shape[0])


def accuracy(scorer: SurrogateScorer, dataset: Dataset) -> float:
    predictions = scorer.probabilities(dataset.images).argmax(axis=1)
    return float(np.mean(predictions == dataset.labels))


def train_surrogate_scorer(train: Dataset, holdout: Dataset, epochs: int = 3, batch_size: int = 64,
                           lr: float = 1e-3, seed: int = 42, floor: Optional[float] = None) -> ScorerResult:
    """
    Fit the classifier with Adam on cross-entropy and measure held-out accuracy.

    Raises:
        InvalidRunConfigError: a dataset has no labels or less than one batch
        ScorerFloorError: held-out accuracy is below `floor`
    """
    if train.labels is None or holdout.labels is None:
        raise InvalidRunConfigError("scorer training needs labeled data")
    if len(train) < batch_size:
        raise InvalidRunConfigError(
            f"{len(train)} training images are fewer than one batch of {batch_size}",
            {"images": len(train), "batch": batch_size}
        )

    scorer = SurrogateScorer(stream_rng(seed, Stream.SCORER_INIT))
    optim = Adam(list(scorer.named_parameters()), lr=lr, beta1=0.9, beta2=0.999)
    for epoch in range(epochs):
        total = 0.0
        batches = make_batches(train, batch_size, seed, epoch)
        for images, labels in batches:
            loss = cross_entropy(scorer(Tensor(images)), labels)
            optim.zero_grad()
            backward(loss)
            optim.step()
            total += loss.item()
        held_out = accuracy(scorer, holdout)
        logger.info(
            f"scorer epoch {epoch + 1}/{epochs} loss={total / len(batches):.4f} accuracy={held_out:.4f}",
            extra={"epoch": epoch}
        )

    result = ScorerResult(scorer, accuracy(scorer, holdout), floor)
    if floor is not None and result.accuracy < floor:
        raise ScorerFloorError(result.accuracy, floor)
    return result


def scorer_checkpoint(result: ScorerResult, seed: int, dataset_name: str = "") -> ModelCheckpoint:
    return ModelCheckpoint(
        architecture=SCORER_KIND,
        seed=seed,
        step=0,
        tensors={f"scorer.{k}": v for k, v in result.scorer.state_dict().items()},
        attributes={"kind": SCORER_KIND, "dataset": dataset_name, "accuracy": f"{result.accuracy:.6f}"},
    )


def scorer_from_checkpoint(checkpoint: ModelCheckpoint) -> SurrogateScorer:
    if checkpoint.attributes.get("kind") != SCORER_KIND:
        raise CheckpointArchitectureError(
            "Checkpoint does not hold a surrogate scorer",
            {"kind": checkpoint.attributes.get("kind"), "architecture": checkpoint.architecture}
        )
    scorer = SurrogateScorer(stream_rng(checkpoint.seed, Stream.SCORER_INIT))
    scorer.load_state_dict(checkpoint.subset("scorer"))
    return scorer.eval()


def noise_images(n: int, seed: int) -> np.ndarray:
    """Uniform noise in [-1, 1], n x 1 x 28 x 28."""
    rng = stream_rng(seed, Stream.NOISE)
    return rng.uniform(-1.0, 1.0, (n, 1, 28, 28)).astype(DTYPE)


def score_images(scorer: SurrogateScorer, images: np.ndarray, splits: int = 10, chunk: int = 100) -> ScoreReport:
    return inception_score(scorer.probabilities(images, chunk), splits)


def score_samples(gan_checkpoint: ModelCheckpoint, scorer: SurrogateScorer, n: int = 1000, splits: int = 10,
                  seed: int = 42, reference: Optional[np.ndarray] = None, chunk: int = 100) -> ScoreReport:
    """
    Generate `n` images from a GAN checkpoint and score them.

    Raises:
        MissingDigitCapsSourceError: capsgan2 without reference images
    """
    gan = gan_from_checkpoint(gan_checkpoint)
    images = generate_images(gan, n, seed, reference=reference, chunk=chunk, action="score samples")
    return score_images(scorer, images, splits, chunk)
