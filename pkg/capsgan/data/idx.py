"""IDX dataset reader (MNIST / Fashion-MNIST layout)."""

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from capsgan.tensor.tensor import DTYPE
from capsgan.utils.exceptions import (
    DatasetNotFoundError,
    IdxCountMismatchError,
    IdxDimensionError,
    IdxHeaderError,
    IdxLabelRangeError,
    IdxMagicError,
    IdxSizeError,
    IdxTruncatedError,
)
from capsgan.utils.logger import get_logger

logger = get_logger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
IMAGE_SIDE = 28
NUM_CLASSES = 10

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Dataset:
    """Images N x 1 x 28 x 28 in [-1, 1] and optional labels in [0, 9]."""

    images: np.ndarray
    labels: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.images.shape[0])

    def subset(self, limit: Optional[int]) -> "Dataset":
        """First `limit` items."""
        if limit is None or limit >= len(self):
            return self
        labels = None if self.labels is None else self.labels[:limit]
        return Dataset(self.images[:limit], labels)

    def split(self, fraction: float) -> tuple["Dataset", "Dataset"]:
        """Head and tail, the tail holding `fraction` of the items (at least one)."""
        tail = max(1, int(round(len(self) * fraction)))
        head = len(self) - tail
        labels = self.labels
        return (
            Dataset(self.images[:head], None if labels is None else labels[:head]),
            Dataset(self.images[head:], None if labels is None else labels[head:]),
        )


def normalize(pixels: np.ndarray) -> np.ndarray:
    """uint8 levels to [-1, 1] via x / 127.5 - 1."""
    return (pixels.astype(DTYPE) / DTYPE(127.5) - DTYPE(1.0)).astype(DTYPE)


def denormalize(values: np.ndarray) -> np.ndarray:
    """[-1, 1] to uint8 via round((x + 1) * 127.5), clamped to [0, 255]."""
    levels = np.rint((values.astype(np.float64) + 1.0) * 127.5)
    return np.clip(levels, 0, 255).astype(np.uint8)


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    if not path.exists():
        raise DatasetNotFoundError(str(path))
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _parse(raw: bytes, path: PathLike, magic: int, dims: int) -> tuple[tuple[int, ...], bytes]:
    header_size = 4 + 4 * dims
    if len(raw) < header_size:
        raise IdxHeaderError(
            f"IDX header of {path} is truncated: {len(raw)} of {header_size} bytes",
            {"path": str(path), "size": len(raw)}
        )
    found = struct.unpack(">I", raw[:4])[0]
    if found != magic:
        raise IdxMagicError(
            f"Bad IDX magic in {path}: 0x{found:08x}, expected 0x{magic:08x}",
            {"path": str(path), "magic": found}
        )
    shape = struct.unpack(f">{dims}I", raw[4:header_size])
    payload = raw[header_size:]
    expected = int(np.prod(shape, dtype=np.int64))
    if len(payload) < expected:
        raise IdxTruncatedError(
            f"IDX payload of {path} is truncated: {len(payload)} of {expected} bytes",
            {"path": str(path), "expected": expected, "found": len(payload)}
        )
    if len(payload) > expected:
        raise IdxSizeError(
            f"IDX file {path} has {len(payload) - expected} bytes after its declared payload",
            {"path": str(path), "expected": expected, "found": len(payload)}
        )
    return shape, payload


def read_idx_images(path: PathLike) -> np.ndarray:
    """Raw uint8 images N x 28 x 28."""
    raw = _read_bytes(path)
    (count, rows, cols), payload = _parse(raw, path, IMAGE_MAGIC, 3)
    if (rows, cols) != (IMAGE_SIDE, IMAGE_SIDE):
        raise IdxDimensionError(
            f"Images in {path} are {rows}x{cols}, expected {IMAGE_SIDE}x{IMAGE_SIDE}",
            {"path": str(path), "rows": rows, "cols": cols}
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path: PathLike) -> np.ndarray:
    raw = _read_bytes(path)
    (count,), payload = _parse(raw, path, LABEL_MAGIC, 1)
    labels = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    if count and labels.max() >= NUM_CLASSES:
        raise IdxLabelRangeError(
            f"Labels in {path} exceed {NUM_CLASSES - 1}",
            {"path": str(path), "max": int(labels.max())}
        )
    return labels


def load_idx(images_path: PathLike, labels_path: Optional[PathLike] = None) -> Dataset:
    """
    Load an IDX image file and optional label file.

    Args:
        images_path: IDX3 file of 28x28 uint8 images, optionally gzipped
        labels_path: IDX1 file of class ids

    Returns:
        Dataset normalized to [-1, 1]

    Raises:
        DatasetNotFoundError, IdxHeaderError, IdxMagicError, IdxSizeError, IdxTruncatedError,
        IdxDimensionError, IdxCountMismatchError, IdxLabelRangeError
    """
    pixels = read_idx_images(images_path)
    if pixels.shape[0] == 0:
        raise IdxTruncatedError(f"IDX file {images_path} holds no images", {"path": str(images_path)})

    labels = None
    if labels_path is not None:
        labels = read_idx_labels(labels_path)
        if labels.shape[0] != pixels.shape[0]:
            raise IdxCountMismatchError(
                f"{pixels.shape[0]} images but {labels.shape[0]} labels",
                {"images": int(pixels.shape[0]), "labels": int(labels.shape[0])}
            )

    logger.info(f"Loaded {pixels.shape[0]} images from {images_path}")
    return Dataset(normalize(pixels)[:, None, :, :], labels)


def write_idx_images(path: PathLike, pixels: np.ndarray) -> None:
    """Write uint8 images N x rows x cols as an IDX3 file."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    header = struct.pack(">IIII", IMAGE_MAGIC, *pixels.shape)
    Path(path).write_bytes(header + pixels.tobytes())


def write_idx_labels(path: PathLike, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    Path(path).write_bytes(struct.pack(">II", LABEL_MAGIC, labels.shape[0]) + labels.tobytes())
