"""Score command."""

from pathlib import Path
from typing import Optional

import click

from capsgan.cli.utils import handle_errors, print_info
from capsgan.data import load_checkpoint, load_idx
from capsgan.metrics import noise_images, score_images, score_samples, scorer_from_checkpoint
from capsgan.utils import get_config

_defaults = get_config()


@click.command()
@click.option("--scorer", type=click.Path(path_type=Path), required=True, help="Surrogate scorer checkpoint")
@click.option("--ckpt", type=click.Path(path_type=Path), default=None, help="GAN checkpoint to sample from")
@click.option("--images", type=click.Path(path_type=Path), default=None, help="IDX images to score directly")
@click.option("--noise", is_flag=True, default=False, show_default=True, help="Score uniform-noise images")
@click.option("--n", "count", type=int, default=_defaults.evaluation.n, show_default=True,
              help="Number of generated or noise images")
@click.option("--splits", type=int, default=_defaults.evaluation.splits, show_default=True,
              help="Number of splits")
@click.option("--seed", type=int, default=_defaults.training.seed, show_default=True, help="Random seed")
@click.option("--data", type=click.Path(path_type=Path), default=None,
              help="IDX images whose DigitCaps feed capsgan2 (required for capsgan2)")
@click.option("--chunk", type=int, default=_defaults.evaluation.chunk, show_default=True,
              help="Images per forward pass")
@handle_errors
def score(scorer: Path, ckpt: Optional[Path], images: Optional[Path], noise: bool, count: int, splits: int,
          seed: int, data: Optional[Path], chunk: int):
    """Print the Inception Score report as CSV."""
    sources = [source for source in (ckpt, images) if source is not None] + ([noise] if noise else [])
    if len(sources) != 1:
        raise click.UsageError("Pass exactly one of --ckpt, --images or --noise")

    model = scorer_from_checkpoint(load_checkpoint(scorer))
    if ckpt is not None:
        reference = load_idx(data).images if data is not None else None
        report = score_samples(load_checkpoint(ckpt), model, count, splits, seed, reference, chunk)
    elif images is not None:
        report = score_images(model, load_idx(images).images, splits, chunk)
    else:
        report = score_images(model, noise_images(count, seed), splits, chunk)

    print_info(f"Scored {report.n} images in {report.splits} splits")
    click.echo(report.to_csv(), nl=False)
