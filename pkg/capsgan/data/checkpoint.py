"""
CGANCKPT checkpoint container.

All integers are little-endian. A section is a manifest (u32 count, then per
entry u32 name length + name, u32 rank, rank x u64 dims) followed by the f32
payloads in manifest order.

    magic       8 bytes  b"CGANCKPT"
    version     u32
    arch        u32 length + utf-8 bytes
    network     section of parameters and buffers under their dotted names
    optimizer   section of moments under optim/<network>/<m|v>/<parameter>,
                then u32 count and per entry u32 name length + name, u64 value
    rng         seed u64, step u64
    attrs       u32 count, then per entry u32 key length + key, u32 value length + value

Every generator a run draws from is keyed by (seed, stream, step or epoch), so
seed and step are the complete random state.
"""

import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from capsgan.utils.exceptions import (
    CheckpointFormatError,
    CheckpointMagicError,
    CheckpointNotFoundError,
    CheckpointSizeError,
    CheckpointVersionError,
)

MAGIC = b"CGANCKPT"
VERSION = 2
PAYLOAD_DTYPE = np.dtype("<f4")
OPTIMIZER_PREFIX = "optim/"

PathLike = Union[str, Path]
Manifest = List[Tuple[str, Tuple[int, ...]]]


@dataclass
class ModelCheckpoint:
    """Everything needed to rebuild networks and resume optimization."""

    architecture: str
    seed: int
    step: int
    tensors: Dict[str, np.ndarray] = field(default_factory=dict)
    attributes: Dict[str, str] = field(default_factory=dict)
    counters: Dict[str, int] = field(default_factory=dict)
    version: int = VERSION

    def subset(self, prefix: str) -> Dict[str, np.ndarray]:
        """Tensors under `prefix.` with the prefix removed."""
        cut = len(prefix) + 1
        return {name[cut:]: value for name, value in self.tensors.items() if name.startswith(prefix + ".")}

    def network_tensors(self) -> Dict[str, np.ndarray]:
        return {name: value for name, value in self.tensors.items() if not name.startswith(OPTIMIZER_PREFIX)}

    def optimizer_tensors(self) -> Dict[str, np.ndarray]:
        return {name: value for name, value in self.tensors.items() if name.startswith(OPTIMIZER_PREFIX)}

    def payload_bytes(self) -> int:
        return sum(int(np.asarray(v).size) * PAYLOAD_DTYPE.itemsize for v in self.tensors.values())


def _text(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _manifest(tensors: Dict[str, np.ndarray]) -> bytes:
    parts = [struct.pack("<I", len(tensors))]
    for name, value in tensors.items():
        shape = np.shape(value)
        parts += [_text(name), struct.pack("<I", len(shape)), struct.pack(f"<{len(shape)}Q", *shape)]
    return b"".join(parts)


def _payloads(tensors: Dict[str, np.ndarray]) -> bytes:
    return b"".join(np.ascontiguousarray(value, dtype=PAYLOAD_DTYPE).tobytes() for value in tensors.values())


def encode_header(checkpoint: ModelCheckpoint) -> bytes:
    """Magic, version, architecture and the network manifest."""
    return b"".join([MAGIC, struct.pack("<I", checkpoint.version), _text(checkpoint.architecture),
                     _manifest(checkpoint.network_tensors())])


def encode_state(checkpoint: ModelCheckpoint) -> bytes:
    """Optimizer section, rng state and attributes: everything after the network payloads."""
    optimizer = checkpoint.optimizer_tensors()
    parts = [_manifest(optimizer), _payloads(optimizer), struct.pack("<I", len(checkpoint.counters))]
    for name, value in checkpoint.counters.items():
        parts += [_text(name), struct.pack("<Q", value)]

    parts.append(struct.pack("<QQ", checkpoint.seed, checkpoint.step))

    parts.append(struct.pack("<I", len(checkpoint.attributes)))
    for key, value in checkpoint.attributes.items():
        parts += [_text(key), _text(value)]
    return b"".join(parts)


def encode_checkpoint(checkpoint: ModelCheckpoint) -> bytes:
    return encode_header(checkpoint) + _payloads(checkpoint.network_tensors()) + encode_state(checkpoint)


def save_checkpoint(checkpoint: ModelCheckpoint, path: PathLike) -> Path:
    """Write the container; the file is replaced only once fully written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = path.with_name(path.name + ".partial")
    partial.write_bytes(encode_checkpoint(checkpoint))
    os.replace(partial, path)
    return path


class _Reader:
    def __init__(self, raw: bytes, path: str):
        self.raw, self.offset, self.path = raw, 0, path

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.raw):
            raise CheckpointSizeError(
                f"Checkpoint {self.path} ends early: {size} bytes wanted at offset {self.offset}",
                {"path": self.path, "offset": self.offset, "size": len(self.raw)}
            )
        chunk = self.raw[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def text(self) -> str:
        start = self.offset
        raw = self.take(self.u32())
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointFormatError(
                f"Checkpoint {self.path} holds a name that is not utf-8 at offset {start}",
                {"path": self.path, "offset": start, "reason": e.reason}
            )

    def manifest(self) -> Manifest:
        entries = []
        for _ in range(self.u32()):
            name = self.text()
            rank = self.u32()
            entries.append((name, tuple(self.u64() for _ in range(rank))))
        return entries

    def payloads(self, manifest: Manifest) -> Dict[str, np.ndarray]:
        declared = sum(int(np.prod(shape, dtype=np.int64)) for _, shape in manifest) * PAYLOAD_DTYPE.itemsize
        if declared > len(self.raw) - self.offset:
            raise CheckpointSizeError(
                f"Checkpoint {self.path} declares {declared} payload bytes but holds {len(self.raw) - self.offset}",
                {"path": self.path, "declared": declared, "found": len(self.raw) - self.offset}
            )
        tensors: Dict[str, np.ndarray] = {}
        for name, shape in manifest:
            count = int(np.prod(shape, dtype=np.int64))
            data = np.frombuffer(self.take(count * PAYLOAD_DTYPE.itemsize), dtype=PAYLOAD_DTYPE)
            tensors[name] = data.astype(np.float32).reshape(shape)
        return tensors


def decode_checkpoint(raw: bytes, path: str = "<memory>") -> ModelCheckpoint:
    """
    Parse a container.

    Raises:
        CheckpointMagicError: the file does not start with CGANCKPT
        CheckpointVersionError: unsupported version
        CheckpointFormatError: a name or attribute is not valid utf-8
        CheckpointSizeError: sections or payloads disagree with the file length
    """
    if raw[:len(MAGIC)] != MAGIC:
        raise CheckpointMagicError(f"{path} is not a CGANCKPT checkpoint", {"path": path})
    reader = _Reader(raw, path)
    reader.take(len(MAGIC))
    version = reader.u32()
    if version != VERSION:
        raise CheckpointVersionError(
            f"Checkpoint version {version} is not supported (expected {VERSION})",
            {"path": path, "version": version}
        )
    architecture = reader.text()
    tensors = reader.payloads(reader.manifest())
    tensors.update(reader.payloads(reader.manifest()))
    counters = {reader.text(): reader.u64() for _ in range(reader.u32())}
    seed, step = reader.u64(), reader.u64()
    attributes = {reader.text(): reader.text() for _ in range(reader.u32())}

    if reader.offset != len(raw):
        raise CheckpointSizeError(
            f"Checkpoint {path} has {len(raw) - reader.offset} bytes after its last section",
            {"path": path, "declared": reader.offset, "found": len(raw)}
        )
    return ModelCheckpoint(architecture, seed, step, tensors, attributes, counters, version)


def load_checkpoint(path: PathLike) -> ModelCheckpoint:
    path = Path(path)
    if not path.is_file():
        raise CheckpointNotFoundError(str(path))
    return decode_checkpoint(path.read_bytes(), str(path))
