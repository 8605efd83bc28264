"""Train command."""

from pathlib import Path
from typing import Optional

import click

from capsgan.cli.utils import build_run_config, echo_header, handle_errors, print_info, print_success
from capsgan.data import load_checkpoint, load_idx
from capsgan.schemas.network import ArchitectureId, FeedSource
from capsgan.schemas.training import GeneratorLoss
from capsgan.training import train as run_training
from capsgan.utils import get_config

_defaults = get_config().training


@click.command()
@click.option("--arch", type=click.Choice([a.value for a in ArchitectureId]), required=True,
              help="GAN architecture")
@click.option("--data", type=click.Path(path_type=Path), required=True, help="IDX image file (optionally .gz)")
@click.option("--labels", type=click.Path(path_type=Path), default=None, show_default="none", help="IDX label file")
@click.option("--epochs", type=int, required=True, help="Number of epochs")
@click.option("--batch", type=int, default=_defaults.batch_size, show_default=True, help="Batch size")
@click.option("--seed", type=int, default=_defaults.seed, show_default=True, help="Random seed")
@click.option("--lr", type=float, default=_defaults.learning_rate, show_default=True, help="Adam learning rate")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Run directory")
@click.option("--routing-iters", type=int, default=_defaults.routing_iterations, show_default=True,
              help="Dynamic routing iterations")
@click.option("--g-loss", type=click.Choice([g.value for g in GeneratorLoss]), default=_defaults.g_loss,
              show_default=True, help="Generator loss variant")
@click.option("--latent", type=int, default=None, show_default="per architecture", help="Latent length (100, or 128 for capsgan3)")
@click.option("--limit", type=int, default=None, show_default="all images", help="Use only the first N images")
@click.option("--max-steps", type=int, default=None, show_default="no limit", help="Stop after this many steps")
@click.option("--log-every", type=int, default=_defaults.log_every, show_default=True,
              help="Steps between metrics rows")
@click.option("--checkpoint-every", type=int, default=_defaults.checkpoint_every, show_default=True,
              help="Steps between checkpoints")
@click.option("--sample-every", type=int, default=_defaults.sample_every, show_default=True,
              help="Steps between sample grids")
@click.option("--no-wall-clock", is_flag=True, default=False, show_default=True,
              help="Write time_ms as 0 so metrics files are byte-comparable")
@click.option("--resume", type=click.Path(path_type=Path), default=None, show_default="start fresh",
              help="Checkpoint of this run to continue from")
@click.option("--experimental-fake-digitcaps", is_flag=True, default=False, show_default=True,
              help="capsgan2 only: feed DigitCaps of generated images instead of real ones")
@handle_errors
def train(arch: str, data: Path, labels: Optional[Path], epochs: int, batch: int, seed: int, lr: float,
          out: Path, routing_iters: int, g_loss: str, latent: Optional[int], limit: Optional[int],
          max_steps: Optional[int], log_every: int, checkpoint_every: int, sample_every: int,
          no_wall_clock: bool, resume: Optional[Path], experimental_fake_digitcaps: bool):
    """Train a GAN on an IDX dataset."""
    config = build_run_config(
        arch=arch, data=data, labels=labels, out=out, epochs=epochs, batch=batch, seed=seed, lr=lr,
        beta1=_defaults.beta1, beta2=_defaults.beta2, adam_eps=_defaults.adam_eps,
        routing_iters=routing_iters, g_loss=g_loss, latent=latent, limit=limit, max_steps=max_steps,
        log_every=log_every, checkpoint_every=checkpoint_every, sample_every=sample_every,
        sample_grid=_defaults.sample_grid, wall_clock=not no_wall_clock,
        feed_source=FeedSource.GENERATED if experimental_fake_digitcaps else FeedSource.REAL,
    )
    click.echo(echo_header(config.to_header()))
    print_info(f"Seed: {config.seed}")

    dataset = load_idx(config.data, config.labels)
    checkpoint = load_checkpoint(resume) if resume is not None else None
    result = run_training(config, dataset, resume=checkpoint)

    print_success(f"Trained {len(result.history)} steps; final checkpoint {result.checkpoint}")
