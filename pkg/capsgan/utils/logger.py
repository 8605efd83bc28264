"""Logging configuration for capsgan."""

import logging
from datetime import datetime, timezone
from typing import Optional

import orjson
from rich.console import Console
from rich.logging import RichHandler

# Logs go to stderr; stdout carries CSV output.
console = Console(stderr=True)

_EXTRA_FIELDS = ("step", "epoch", "arch", "duration_ms")


class JSONFormatter(logging.Formatter):
    """Format logs as JSON."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        for field in _EXTRA_FIELDS:
            if hasattr(record, field):
                log_data[field] = getattr(record, field)

        return orjson.dumps(log_data).decode("utf-8")


def setup_logging(
    level: str = "INFO",
    format_type: str = "rich",
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Setup logging configuration.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format_type: Format type (json or rich)
        log_file: Optional log file path, always written as JSON lines

    Returns:
        Configured root capsgan logger
    """
    logger = logging.getLogger("capsgan")
    logger.setLevel(getattr(logging, level.upper()))
    logger.handlers.clear()
    logger.propagate = False

    if format_type == "json":
        handler: logging.Handler = logging.StreamHandler(console.file)
        handler.setFormatter(JSONFormatter())
    else:
        handler = RichHandler(
            console=console,
            show_time=True,
            show_path=False,
            rich_tracebacks=True
        )
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))

    handler.setLevel(getattr(logging, level.upper()))
    logger.addHandler(handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(getattr(logging, level.upper()))
        file_handler.setFormatter(JSONFormatter())
        logger.addHandler(file_handler)

    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance.

    Args:
        name: Logger name

    Returns:
        Logger instance
    """
    return logging.getLogger(f"capsgan.{name}")
