"""Configuration management for capsgan."""

import os
import re
from pathlib import Path
from typing import Dict, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import ConfigDict, Field
from pydantic_settings import BaseSettings

from capsgan.utils.exceptions import ConfigFileNotFoundError, InvalidConfigError

load_dotenv()


class LoggingConfig(BaseSettings):
    """Logging configuration."""

    model_config = ConfigDict(extra="ignore")

    level: str = "INFO"
    format: str = "rich"  # rich or json
    log_file: Optional[str] = None


class TrainingDefaults(BaseSettings):
    """Defaults for adversarial training runs."""

    model_config = ConfigDict(extra="ignore")

    batch_size: int = 64
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    adam_eps: float = 1e-8
    routing_iterations: int = 3
    seed: int = 42
    g_loss: str = "non_saturating"
    log_every: int = 1
    checkpoint_every: int = 500
    sample_every: int = 500
    sample_grid: int = 8


class ScorerDefaults(BaseSettings):
    """Defaults for the surrogate scoring classifier."""

    model_config = ConfigDict(extra="ignore")

    epochs: int = 3
    batch_size: int = 64
    learning_rate: float = 1e-3
    holdout_fraction: float = 0.1
    floors: Dict[str, float] = Field(default_factory=lambda: {"mnist": 0.97, "fashion": 0.85})


class EvaluationDefaults(BaseSettings):
    """Defaults for sample scoring."""

    model_config = ConfigDict(extra="ignore")

    n: int = 1000
    splits: int = 10
    chunk: int = 100


class Config(BaseSettings):
    """Main configuration."""

    model_config = ConfigDict(extra="ignore", env_file=".env", env_file_encoding="utf-8", case_sensitive=False)

    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    training: TrainingDefaults = Field(default_factory=TrainingDefaults)
    scorer: ScorerDefaults = Field(default_factory=ScorerDefaults)
    evaluation: EvaluationDefaults = Field(default_factory=EvaluationDefaults)


def load_config(config_path: Optional[Union[str, Path]] = None) -> Config:
    """
    Load configuration from YAML file and environment variables.

    Args:
        config_path: Path to config.yaml file

    Returns:
        Config object

    Raises:
        ConfigFileNotFoundError: If config file not found
        InvalidConfigError: If config file is invalid
    """
    if config_path is None:
        config_path = Path(__file__).parent.parent / "config.yaml"

    config_path = Path(config_path)

    if not config_path.exists():
        raise ConfigFileNotFoundError(
            f"Config file not found: {config_path}",
            {"path": str(config_path)}
        )

    try:
        with open(config_path, "r") as f:
            yaml_config = yaml.safe_load(f) or {}

        yaml_config = _replace_env_vars(yaml_config)

        return Config(
            logging=LoggingConfig(**yaml_config.get("logging", {})),
            training=TrainingDefaults(**yaml_config.get("training", {})),
            scorer=ScorerDefaults(**yaml_config.get("scorer", {})),
            evaluation=EvaluationDefaults(**yaml_config.get("evaluation", {})),
        )

    except Exception as e:
        raise InvalidConfigError(
            f"Failed to parse config file: {e}",
            {"path": str(config_path), "error": str(e)}
        )


def _replace_env_vars(config_dict: dict) -> dict:
    """
    Replace environment variable references in config values.

    Supports ${VAR} and ${VAR:-default} syntax.
    """
    pattern = re.compile(r"\$\{([^}:]+)(?::-(.*?))?\}")

    def replace_value(value):
        if isinstance(value, str):
            return pattern.sub(lambda m: os.getenv(m.group(1), m.group(2) or ""), value)
        elif isinstance(value, dict):
            return {k: replace_value(v) for k, v in value.items()}
        elif isinstance(value, list):
            return [replace_value(item) for item in value]
        return value

    return replace_value(config_dict)


_config: Optional[Config] = None


def get_config() -> Config:
    """Get global configuration instance."""
    global _config
    if _config is None:
        _config = load_config()
    return _config


def set_config(config: Config) -> None:
    """Set global configuration instance."""
    global _config
    _config = config
