"""Shared fixtures: synthetic IDX files, tiny datasets and small network widths."""

from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pytest

from capsgan.data import Dataset, normalize, write_idx_images, write_idx_labels
from capsgan.schemas import ArchitectureId, NetworkSpec
from capsgan.utils.logger import setup_logging


def write_idx_pair(directory: Path, count: int, seed: int = 0, name: str = "train") -> Tuple[Path, Path]:
    """Random 28x28 images with labels cycling through 0..9."""
    rng = np.random.default_rng(seed)
    images = directory / f"{name}-images-idx3-ubyte"
    labels = directory / f"{name}-labels-idx1-ubyte"
    write_idx_images(images, rng.integers(0, 256, (count, 28, 28), dtype=np.uint8))
    write_idx_labels(labels, np.arange(count) % 10)
    return images, labels


def small_spec(architecture: ArchitectureId, routing_iterations: int = 2) -> NetworkSpec:
    """Reduced widths: 72 primary capsules of dim 4, 3 digit capsules of dim 4."""
    return NetworkSpec(
        architecture=architecture,
        routing_iterations=routing_iterations,
        conv_channels=8,
        primary_types=2,
        primary_dim=4,
        digit_count=3,
        digit_dim=4,
        latent_capsules=4,
        latent_capsule_dim=4,
        routed_channels=(8, 4, 4),
    )


def random_dataset(count: int, seed: int = 0, labels: Optional[np.ndarray] = None) -> Dataset:
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, (count, 28, 28), dtype=np.uint8)
    return Dataset(normalize(pixels)[:, None], labels)


def banded_dataset(count: int, seed: int = 0) -> Dataset:
    """Dark images with a bright two-row band whose height encodes the label."""
    rng = np.random.default_rng(seed)
    labels = np.arange(count) % 10
    images = np.full((count, 1, 28, 28), -1.0)
    for index, label in enumerate(labels):
        images[index, 0, 4 + 2 * label:6 + 2 * label] = 1.0
    images += rng.normal(0.0, 0.1, images.shape)
    return Dataset(np.clip(images, -1.0, 1.0).astype(np.float32), labels)


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    setup_logging("WARNING")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def idx_files(tmp_path) -> Tuple[Path, Path]:
    return write_idx_pair(tmp_path, 64)


@pytest.fixture
def tiny_dataset() -> Dataset:
    return random_dataset(16)
