"""Compare command: train every architecture on one seed and score them alike."""

from pathlib import Path
from typing import Optional

import click

from capsgan.cli.utils import build_run_config, format_compare_table, handle_errors, print_info, print_warning
from capsgan.data import load_checkpoint, load_idx
from capsgan.metrics import score_samples, scorer_from_checkpoint
from capsgan.schemas.network import ArchitectureId
from capsgan.training import train as run_training
from capsgan.utils import get_config
from capsgan.utils.logger import console

_defaults = get_config()

# Published MNIST Inception Scores, for ordering only
PUBLISHED_MNIST = {
    ArchitectureId.DCGAN: 2.32,
    ArchitectureId.CAPSGAN1: 2.35,
    ArchitectureId.CAPSGAN2: 2.37,
    ArchitectureId.CAPSGAN3: 2.57,
}


@click.command()
@click.option("--data", type=click.Path(path_type=Path), required=True, help="IDX training images")
@click.option("--scorer", type=click.Path(path_type=Path), required=True, help="Surrogate scorer checkpoint")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Directory for one run per architecture")
@click.option("--epochs", type=int, default=1, show_default=True, help="Epochs per architecture")
@click.option("--batch", type=int, default=_defaults.training.batch_size, show_default=True, help="Batch size")
@click.option("--seed", type=int, default=_defaults.training.seed, show_default=True, help="Shared random seed")
@click.option("--limit", type=int, default=None, show_default="all images", help="Use only the first N images")
@click.option("--max-steps", type=int, default=None, show_default="no limit", help="Stop each run after this many steps")
@click.option("--n", "count", type=int, default=_defaults.evaluation.n, show_default=True,
              help="Generated images scored per architecture")
@click.option("--splits", type=int, default=_defaults.evaluation.splits, show_default=True, help="Number of splits")
@handle_errors
def compare(data: Path, scorer: Path, out: Path, epochs: int, batch: int, seed: int, limit: Optional[int],
            max_steps: Optional[int], count: int, splits: int):
    """Exploratory score table for all four architectures."""
    print_warning("Desk-scale scores are exploratory and are not expected to match published values")
    dataset = load_idx(data).subset(limit)
    model = scorer_from_checkpoint(load_checkpoint(scorer))
    t = _defaults.training

    rows = []
    for arch in ArchitectureId:
        config = build_run_config(
            arch=arch, data=data, out=out / arch.value, epochs=epochs, batch=batch, seed=seed,
            lr=t.learning_rate, beta1=t.beta1, beta2=t.beta2, adam_eps=t.adam_eps,
            routing_iters=t.routing_iterations, g_loss=t.g_loss, limit=limit, max_steps=max_steps,
            log_every=t.log_every, checkpoint_every=t.checkpoint_every, sample_every=t.sample_every,
            sample_grid=t.sample_grid,
        )
        print_info(f"Training {arch.value}")
        result = run_training(config, dataset)
        report = score_samples(load_checkpoint(result.checkpoint), model, count, splits, seed,
                               reference=dataset.images, chunk=_defaults.evaluation.chunk)
        rows.append({"architecture": arch.value, "mean": report.mean, "std": report.std,
                     "reference": PUBLISHED_MNIST[arch]})

    console.print(format_compare_table(rows))
