"""Config command."""

from pathlib import Path
from typing import Optional

import click

from capsgan.cli.utils import format_config_table, handle_errors
from capsgan.utils import get_config, load_config
from capsgan.utils.logger import console


@click.command(name="config")
@click.option("--file", "config_file", type=click.Path(path_type=Path), default=None,
              help="Configuration file to show instead of the packaged one")
@handle_errors
def show_config(config_file: Optional[Path]):
    """Show the effective configuration."""
    config = load_config(config_file) if config_file else get_config()
    console.print(format_config_table(config.model_dump()))
