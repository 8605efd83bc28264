"""CLI utilities for errors, messages and formatting."""

import functools
import sys
from typing import Any, Callable, Dict, Iterable, Optional

import orjson
from pydantic import ValidationError
from rich import box
from rich.table import Table

from capsgan.schemas.training import RunConfig
from capsgan.utils.exceptions import CapsGanException, InvalidRunConfigError
from capsgan.utils.logger import console


def print_error(message: str) -> None:
    """
    Print error message.

    Args:
        message: Error message
    """
    console.print(f"[red]✗ Error:[/red] {message}")


def print_success(message: str) -> None:
    console.print(f"[green]✓[/green] {message}")


def print_info(message: str) -> None:
    console.print(f"[blue]ℹ[/blue] {message}")


def print_warning(message: str) -> None:
    console.print(f"[yellow]⚠[/yellow] {message}")


def handle_errors(func: Callable) -> Callable:
    """Report a CapsGanException and exit with its code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except CapsGanException as e:
            print_error(e.message)
            sys.exit(e.exit_code)

    return wrapper


def build_run_config(**values: Any) -> RunConfig:
    """
    Validate flags into a RunConfig.

    Raises:
        InvalidRunConfigError: a value is out of range or breaks an architecture constraint
    """
    try:
        return RunConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "config"
        raise InvalidRunConfigError(f"{where}: {first['msg']}", {"errors": str(e)})


def echo_header(values: Dict[str, Any]) -> str:
    """The resolved configuration as one JSON line."""
    return orjson.dumps(values, option=orjson.OPT_SORT_KEYS).decode("utf-8")


def format_compare_table(rows: Iterable[Dict[str, Any]]) -> Table:
    """
    Format architecture scores next to the published MNIST scores.

    Args:
        rows: dicts with architecture, mean, std, reference

    Returns:
        Rich table
    """
    table = Table(title="Surrogate Inception Score", box=box.ROUNDED)

    table.add_column("Architecture", style="cyan", no_wrap=True)
    table.add_column("Score", justify="right", style="green")
    table.add_column("Std", justify="right", style="dim")
    table.add_column("Rank", justify="right")
    table.add_column("Published (MNIST)", justify="right", style="blue")
    table.add_column("Published rank", justify="right")

    rows = list(rows)
    ranked = sorted(rows, key=lambda r: r["mean"], reverse=True)
    published = sorted(rows, key=lambda r: r["reference"] or 0.0, reverse=True)
    for row in rows:
        table.add_row(
            row["architecture"],
            f"{row['mean']:.3f}",
            f"{row['std']:.3f}",
            str(ranked.index(row) + 1),
            f"{row['reference']:.2f}" if row["reference"] else "-",
            str(published.index(row) + 1) if row["reference"] else "-",
        )

    return table


def format_config_table(sections: Dict[str, Dict[str, Any]], title: Optional[str] = None) -> Table:
    table = Table(title=title or "Configuration", box=box.ROUNDED)

    table.add_column("Section", style="cyan", no_wrap=True)
    table.add_column("Key", style="green")
    table.add_column("Value")

    for section, values in sections.items():
        for key, value in values.items():
            table.add_row(section, key, str(value))

    return table
