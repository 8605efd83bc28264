"""Tests for configuration loading."""

import pytest

from capsgan.utils import Config, get_config, load_config, set_config
from capsgan.utils.config import _replace_env_vars
from capsgan.utils.exceptions import ConfigFileNotFoundError, InvalidConfigError


def test_packaged_defaults(monkeypatch):
    monkeypatch.delenv("CAPSGAN_LOG_LEVEL", raising=False)
    config = load_config()
    assert config.logging.level == "INFO"
    assert config.training.batch_size == 64
    assert config.training.learning_rate == pytest.approx(2e-4)
    assert config.training.routing_iterations == 3
    assert config.scorer.floors == {"mnist": 0.97, "fashion": 0.85}
    assert (config.evaluation.n, config.evaluation.splits) == (1000, 10)


def test_environment_substitution(monkeypatch):
    monkeypatch.setenv("CAPSGAN_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("CAPSGAN_LOG_FORMAT", "json")
    config = load_config()
    assert config.logging.level == "DEBUG"
    assert config.logging.format == "json"


def test_replace_env_vars(monkeypatch):
    monkeypatch.setenv("CAPSGAN_TEST_SEED", "7")
    monkeypatch.delenv("CAPSGAN_TEST_UNSET", raising=False)
    replaced = _replace_env_vars({
        "seed": "${CAPSGAN_TEST_SEED}",
        "nested": {"level": "${CAPSGAN_TEST_UNSET:-WARNING}"},
        "items": ["${CAPSGAN_TEST_UNSET}", 3],
    })
    assert replaced == {"seed": "7", "nested": {"level": "WARNING"}, "items": ["", 3]}


def test_partial_file_keeps_defaults(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("training:\n  seed: 11\nevaluation:\n  splits: 5\n")
    config = load_config(path)
    assert config.training.seed == 11
    assert config.training.batch_size == 64
    assert config.evaluation.splits == 5


def test_missing_file(tmp_path):
    with pytest.raises(ConfigFileNotFoundError):
        load_config(tmp_path / "absent.yaml")


@pytest.mark.parametrize("text", ["training: [unclosed\n", "training:\n  batch_size: lots\n"])
def test_invalid_file(tmp_path, text):
    path = tmp_path / "config.yaml"
    path.write_text(text)
    with pytest.raises(InvalidConfigError) as excinfo:
        load_config(path)
    assert excinfo.value.exit_code == 2


def test_global_config_can_be_replaced():
    original = get_config()
    try:
        replacement = Config()
        set_config(replacement)
        assert get_config() is replacement
    finally:
        set_config(original)
