"""Adversarial training loop."""

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import orjson

from capsgan.data.batching import make_batches
from capsgan.data.checkpoint import ModelCheckpoint, save_checkpoint
from capsgan.data.idx import Dataset
from capsgan.data.image_grid import write_image_grid
from capsgan.networks import Gan, build_gan, resolve_spec
from capsgan.schemas.network import FeedSource, NetworkSpec
from capsgan.schemas.training import GanBatchLosses, GeneratorLoss, RunConfig
from capsgan.tensor import backward, no_grad
from capsgan.tensor.tensor import Tensor
from capsgan.training.losses import d_loss, g_loss
from capsgan.training.optimizer import Adam
from capsgan.training.sampling import GAN_KIND, generate_images, masked_digitcaps, sample_latent, spec_from_checkpoint
from capsgan.utils.exceptions import CheckpointArchitectureError, InvalidRunConfigError, NumericalFailureError
from capsgan.utils.logger import get_logger
from capsgan.utils.seeding import Stream, stream_rng

logger = get_logger(__name__)

METRICS_HEADER = ["step", "epoch", "d_loss", "g_loss", "d_real_mean", "d_fake_mean", "time_ms"]
METRICS_FILE = "metrics.csv"
FINAL_CHECKPOINT = "ckpt-final"


@dataclass
class TrainingState:
    """Networks, their optimizers and the position in the run."""

    gan: Gan
    d_optim: Adam
    g_optim: Adam
    seed: int
    step: int = 0
    epoch: int = 0
    g_loss: GeneratorLoss = GeneratorLoss.NON_SATURATING
    feed_source: FeedSource = FeedSource.REAL


@dataclass
class TrainResult:
    checkpoint: Path
    history: List[GanBatchLosses] = field(default_factory=list)
    samples: List[Path] = field(default_factory=list)


def create_state(spec: NetworkSpec, seed: int, lr: float = 2e-4, beta1: float = 0.5, beta2: float = 0.999,
                 eps: float = 1e-8, g_loss_variant: GeneratorLoss = GeneratorLoss.NON_SATURATING,
                 feed_source: FeedSource = FeedSource.REAL) -> TrainingState:
    gan = build_gan(spec, seed)
    gan.train()
    return TrainingState(
        gan=gan,
        d_optim=Adam(list(gan.discriminator.named_parameters()), lr, beta1, beta2, eps),
        g_optim=Adam(list(gan.generator.named_parameters()), lr, beta1, beta2, eps),
        seed=seed,
        g_loss=g_loss_variant,
        feed_source=feed_source,
    )


def _digitcaps_feed(state: TrainingState, real: np.ndarray, rng: np.random.Generator) -> Tensor:
    """
    DigitCaps input for capsgan2.

    real: masked DigitCaps of the real batch. generated: a preview batch is first
    generated from the real feed, and the masked DigitCaps of the discriminator
    applied to the preview are used instead.
    """
    gan = state.gan
    d = masked_digitcaps(gan, real)
    if state.feed_source == FeedSource.GENERATED:
        with no_grad():
            preview = gan.generator(sample_latent(rng, real.shape[0], gan.spec.latent_dim), d)
        d = masked_digitcaps(gan, preview.data)
    return d


def train_step(state: TrainingState, real_batch: np.ndarray, rng: np.random.Generator) -> GanBatchLosses:
    """
    One discriminator update followed by one generator update.

    Both updates see the same real batch. For capsgan2 the generator is fed the
    masked DigitCaps of that batch, re-read after the discriminator update.

    Raises:
        NumericalFailureError: a loss or gradient is not finite
    """
    gan = state.gan
    spec = gan.spec
    batch = real_batch.shape[0]
    real = Tensor(real_batch)

    # discriminator
    feed = _digitcaps_feed(state, real_batch, rng) if spec.needs_digitcaps else None
    with no_grad():
        fakes = gan.generator(sample_latent(rng, batch, spec.latent_dim), feed)
    scores_real = gan.discriminator(real, rng).score
    scores_fake = gan.discriminator(fakes.detach(), rng).score
    loss_d = d_loss(scores_real, scores_fake)
    state.d_optim.zero_grad()
    backward(loss_d)
    state.d_optim.step()

    # generator
    if spec.needs_digitcaps and state.feed_source == FeedSource.REAL:
        feed = masked_digitcaps(gan, real_batch)
    images = gan.generator(sample_latent(rng, batch, spec.latent_dim), feed)
    loss_g = g_loss(gan.discriminator(images, rng).score, state.g_loss)
    state.g_optim.zero_grad()
    backward(loss_g)
    state.g_optim.step()
    # discriminator gradients from the generator pass are discarded
    state.d_optim.zero_grad()

    return GanBatchLosses(
        step=state.step,
        epoch=state.epoch,
        d_loss=loss_d.item(),
        g_loss=loss_g.item(),
        d_real_mean=float(scores_real.data.mean()),
        d_fake_mean=float(scores_fake.data.mean()),
        feed_source=state.feed_source if spec.needs_digitcaps else None,
    )


def make_checkpoint(state: TrainingState) -> ModelCheckpoint:
    """Networks, buffers and both optimizers' moments in one container."""
    tensors = {f"discriminator.{k}": v for k, v in state.gan.discriminator.state_dict().items()}
    tensors.update({f"generator.{k}": v for k, v in state.gan.generator.state_dict().items()})
    tensors.update(state.d_optim.state_tensors("optim/discriminator"))
    tensors.update(state.g_optim.state_tensors("optim/generator"))
    return ModelCheckpoint(
        architecture=state.gan.spec.architecture.value,
        seed=state.seed,
        step=state.step,
        tensors=tensors,
        attributes={
            "kind": GAN_KIND,
            "network_spec": orjson.dumps(state.gan.spec.model_dump(mode="json")).decode("utf-8"),
            "g_loss": GeneratorLoss(state.g_loss).value,
            "feed_source": FeedSource(state.feed_source).value,
        },
        counters={
            "epoch": state.epoch,
            "optim/discriminator/t": state.d_optim.state.t,
            "optim/generator/t": state.g_optim.state.t,
        },
    )


def restore_optimizers(state: TrainingState, checkpoint: ModelCheckpoint) -> None:
    state.d_optim.load_state_tensors("optim/discriminator", checkpoint.tensors,
                                     checkpoint.counters.get("optim/discriminator/t", 0))
    state.g_optim.load_state_tensors("optim/generator", checkpoint.tensors,
                                     checkpoint.counters.get("optim/generator/t", 0))
    state.step = checkpoint.step
    state.epoch = checkpoint.counters.get("epoch", 0)


def resume_state(state: TrainingState, checkpoint: ModelCheckpoint) -> None:
    """
    Continue a run from one of its own checkpoints.

    Weights, batch-norm buffers, optimizer moments and the step counter are
    restored; every later draw is keyed by the seed and the step, so nothing else is needed.

    Raises:
        CheckpointArchitectureError: the checkpoint holds another architecture or no GAN
        InvalidRunConfigError: the checkpoint was written with another seed
    """
    spec = spec_from_checkpoint(checkpoint)
    if spec != state.gan.spec:
        raise CheckpointArchitectureError(
            "Checkpoint networks differ from the configured run",
            {"checkpoint": spec.architecture.value, "run": state.gan.spec.architecture.value}
        )
    if checkpoint.seed != state.seed:
        raise InvalidRunConfigError(
            f"Checkpoint was written with seed {checkpoint.seed}, not {state.seed}",
            {"checkpoint_seed": checkpoint.seed, "seed": state.seed}
        )
    state.gan.discriminator.load_state_dict(checkpoint.subset("discriminator"))
    state.gan.generator.load_state_dict(checkpoint.subset("generator"))
    restore_optimizers(state, checkpoint)


def _format_row(losses: GanBatchLosses) -> List[str]:
    return [
        str(losses.step), str(losses.epoch),
        f"{losses.d_loss:.6f}", f"{losses.g_loss:.6f}",
        f"{losses.d_real_mean:.6f}", f"{losses.d_fake_mean:.6f}",
        f"{losses.time_ms:.3f}",
    ]


def _write_samples(state: TrainingState, config: RunConfig, dataset: Dataset) -> Path:
    grid = config.sample_grid
    images = generate_images(state.gan, grid * grid, config.seed, reference=dataset.images, action="write samples")
    path = config.out / f"samples-{state.step:06d}.pgm"
    write_image_grid(images, grid, grid, path)
    logger.info(f"Wrote sample grid {path.name}", extra={"step": state.step, "arch": config.arch.value})
    return path


def train(config: RunConfig, dataset: Dataset, spec: Optional[NetworkSpec] = None,
          resume: Optional[ModelCheckpoint] = None) -> TrainResult:
    """
    Run `config.epochs` epochs of train_step over seeded, shuffled batches.

    Writes metrics.csv, ckpt-NNNNNN every checkpoint_every steps, ckpt-final and
    samples-NNNNNN.pgm grids under config.out. Step s draws its randomness from the
    train-step stream at index s. With `resume`, the batches up to the checkpoint's
    step are skipped and metrics rows are appended, so the run ends as if it had
    never stopped.

    Raises:
        InvalidRunConfigError: the dataset holds less than one batch
        NumericalFailureError: with the failing step; earlier checkpoints stay on disk
    """
    dataset = dataset.subset(config.limit)
    if len(dataset) < config.batch:
        raise InvalidRunConfigError(
            f"Dataset has {len(dataset)} images, fewer than one batch of {config.batch}",
            {"images": len(dataset), "batch": config.batch}
        )
    spec = spec or resolve_spec(config.arch, routing_iterations=config.routing_iters)
    state = create_state(spec, config.seed, config.lr, config.beta1, config.beta2, config.adam_eps,
                         config.g_loss, config.feed_source)
    if resume is not None:
        resume_state(state, resume)
    start = state.step
    config.out.mkdir(parents=True, exist_ok=True)
    result = TrainResult(checkpoint=config.out / FINAL_CHECKPOINT)
    arch = config.arch.value

    logger.info(
        f"Training {arch}: {spec.latent_dim}-d latent, "
        f"D {state.gan.discriminator.parameter_count()} / G {state.gan.generator.parameter_count()} parameters"
        + (f", resuming after step {start}" if start else ""),
        extra={"arch": arch, "step": start}
    )

    metrics_path = config.out / METRICS_FILE
    appending = start > 0 and metrics_path.exists()
    with open(metrics_path, "a" if appending else "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if not appending:
            writer.writerow(METRICS_HEADER)

        position = 0
        done = config.max_steps is not None and start >= config.max_steps
        for epoch in range(config.epochs):
            if done:
                break
            for images, _ in make_batches(dataset, config.batch, config.seed, epoch):
                position += 1
                if position <= start:
                    continue
                state.epoch = epoch
                state.step = position
                started = time.perf_counter()
                try:
                    losses = train_step(state, images, stream_rng(config.seed, Stream.TRAIN_STEP, state.step))
                except NumericalFailureError as e:
                    logger.error(f"Numerical failure: {e.message}", extra={"step": state.step, "arch": arch})
                    raise NumericalFailureError(e.message, step=state.step, details=e.details)
                elapsed = (time.perf_counter() - started) * 1000.0
                losses.time_ms = round(elapsed, 3) if config.wall_clock else 0.0
                result.history.append(losses)

                if state.step % config.log_every == 0:
                    writer.writerow(_format_row(losses))
                    f.flush()
                    logger.info(
                        f"step {state.step} d_loss={losses.d_loss:.4f} g_loss={losses.g_loss:.4f} "
                        f"D(x)={losses.d_real_mean:.3f} D(G(z))={losses.d_fake_mean:.3f}",
                        extra={"step": state.step, "epoch": epoch, "arch": arch, "duration_ms": losses.time_ms}
                    )
                if state.step % config.checkpoint_every == 0:
                    path = save_checkpoint(make_checkpoint(state), config.out / f"ckpt-{state.step:06d}")
                    logger.info(f"Saved checkpoint {path.name}", extra={"step": state.step, "arch": arch})
                if state.step % config.sample_every == 0:
                    result.samples.append(_write_samples(state, config, dataset))
                if config.max_steps is not None and state.step >= config.max_steps:
                    done = True
                    break

    save_checkpoint(make_checkpoint(state), result.checkpoint)
    if state.step % config.sample_every != 0:
        result.samples.append(_write_samples(state, config, dataset))
    logger.info(f"Finished after {state.step} steps", extra={"step": state.step, "arch": arch})
    return result
