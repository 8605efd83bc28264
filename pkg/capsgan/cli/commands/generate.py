"""Generate command."""

from pathlib import Path
from typing import Optional

import click

from capsgan.cli.utils import handle_errors, print_success
from capsgan.data import load_checkpoint, load_idx, parse_grid, write_image_grid
from capsgan.training import gan_from_checkpoint, generate_images
from capsgan.utils import get_config
from capsgan.utils.exceptions import ShapeError

_defaults = get_config()


@click.command()
@click.option("--ckpt", type=click.Path(path_type=Path), required=True, help="GAN checkpoint")
@click.option("--n", "count", type=int, default=64, show_default=True, help="Number of samples")
@click.option("--grid", default="8x8", show_default=True, help="Grid as ROWSxCOLS")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Output PGM file")
@click.option("--seed", type=int, default=_defaults.training.seed, show_default=True, help="Random seed")
@click.option("--data", type=click.Path(path_type=Path), default=None,
              help="IDX images whose DigitCaps feed capsgan2 (required for capsgan2)")
@click.option("--chunk", type=int, default=_defaults.evaluation.chunk, show_default=True,
              help="Images generated per forward pass")
@handle_errors
def generate(ckpt: Path, count: int, grid: str, out: Path, seed: int, data: Optional[Path], chunk: int):
    """Write a grid of generated samples as PGM."""
    rows, cols = parse_grid(grid)
    if count < 1 or count > rows * cols:
        raise ShapeError("generate", f"{count} samples do not fit a {rows}x{cols} grid")

    gan = gan_from_checkpoint(load_checkpoint(ckpt))
    reference = load_idx(data).images if data is not None else None
    images = generate_images(gan, count, seed, reference=reference, chunk=chunk)
    write_image_grid(images, rows, cols, out)

    print_success(f"Wrote {count} {gan.architecture.value} samples to {out}")
