"""Main CLI entry point."""

from typing import Optional

import click

from capsgan import __version__
from capsgan.cli.commands import compare, generate, score, show_config, train, train_scorer
from capsgan.utils import get_config, setup_logging

_logging = get_config().logging


@click.group()
@click.version_option(version=__version__, prog_name="capsgan")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=_logging.level.upper(), show_default=True, help="Logging level")
@click.option("--log-format", type=click.Choice(["rich", "json"]), default=_logging.format, show_default=True,
              help="Log line format")
@click.option("--log-file", type=click.Path(), default=_logging.log_file, help="Also write JSON logs to this file")
def cli(log_level: str, log_format: str, log_file: Optional[str]):
    """
    capsgan - Capsule GAN toolkit

    Train DCGAN and capsule GANs on IDX datasets, sample them and score them
    with a surrogate Inception Score.
    """
    setup_logging(log_level, log_format, log_file)


cli.add_command(train)
cli.add_command(generate)
cli.add_command(score)
cli.add_command(train_scorer)
cli.add_command(compare)
cli.add_command(show_config)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
