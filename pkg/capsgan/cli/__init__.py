"""Command-line interface."""

from capsgan.cli.main import cli, main

__all__ = ["cli", "main"]
