"""CLI commands."""

from capsgan.cli.commands.compare import compare
from capsgan.cli.commands.config import show_config
from capsgan.cli.commands.generate import generate
from capsgan.cli.commands.score import score
from capsgan.cli.commands.scorer import train_scorer
from capsgan.cli.commands.train import train

__all__ = ["compare", "show_config", "generate", "score", "train_scorer", "train"]
