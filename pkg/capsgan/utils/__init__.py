"""Utility modules for capsgan."""

from capsgan.utils.config import get_config, set_config, load_config, Config
from capsgan.utils.logger import get_logger, setup_logging

__all__ = [
    "get_config",
    "set_config",
    "load_config",
    "Config",
    "get_logger",
    "setup_logging",
]
