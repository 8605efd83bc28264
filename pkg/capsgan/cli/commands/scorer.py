"""Train-scorer command."""

from pathlib import Path
from typing import Optional

import click

from capsgan.cli.utils import handle_errors, print_success
from capsgan.data import load_idx, save_checkpoint
from capsgan.metrics import scorer_checkpoint, train_surrogate_scorer
from capsgan.utils import get_config

_defaults = get_config()


@click.command(name="train-scorer")
@click.option("--data", type=click.Path(path_type=Path), required=True, help="IDX training images")
@click.option("--labels", type=click.Path(path_type=Path), required=True, help="IDX training labels")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Scorer checkpoint to write")
@click.option("--seed", type=int, default=_defaults.training.seed, show_default=True, help="Random seed")
@click.option("--test-data", type=click.Path(path_type=Path), default=None, help="Held-out IDX images")
@click.option("--test-labels", type=click.Path(path_type=Path), default=None, help="Held-out IDX labels")
@click.option("--dataset", type=click.Choice(sorted(_defaults.scorer.floors)), default="mnist",
              show_default=True, help="Dataset family; selects the accuracy floor")
@click.option("--floor", type=float, default=None, show_default="dataset floor", help="Accuracy floor overriding the dataset's")
@click.option("--epochs", type=int, default=_defaults.scorer.epochs, show_default=True, help="Training epochs")
@click.option("--batch", type=int, default=_defaults.scorer.batch_size, show_default=True, help="Batch size")
@click.option("--lr", type=float, default=_defaults.scorer.learning_rate, show_default=True,
              help="Adam learning rate")
@click.option("--limit", type=int, default=None, show_default="all images", help="Use only the first N training images")
@handle_errors
def train_scorer(data: Path, labels: Path, out: Path, seed: int, test_data: Optional[Path],
                 test_labels: Optional[Path], dataset: str, floor: Optional[float], epochs: int, batch: int,
                 lr: float, limit: Optional[int]):
    """Train the surrogate scoring classifier."""
    if (test_data is None) != (test_labels is None):
        raise click.UsageError("--test-data and --test-labels go together")

    train_set = load_idx(data, labels).subset(limit)
    if test_data is not None:
        holdout = load_idx(test_data, test_labels)
    else:
        train_set, holdout = train_set.split(_defaults.scorer.holdout_fraction)

    floor = _defaults.scorer.floors[dataset] if floor is None else floor
    result = train_surrogate_scorer(train_set, holdout, epochs, batch, lr, seed, floor)
    save_checkpoint(scorer_checkpoint(result, seed, dataset), out)

    click.echo(f"accuracy={result.accuracy:.4f}")
    print_success(f"Saved scorer to {out}")
