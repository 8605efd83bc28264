"""Tests for IDX ingestion, batching, sample grids and the checkpoint container."""

import gzip
import struct

import numpy as np
import pytest

from capsgan.data import (
    IMAGE_MAGIC,
    LABEL_MAGIC,
    MAGIC,
    ModelCheckpoint,
    decode_checkpoint,
    denormalize,
    encode_checkpoint,
    encode_header,
    encode_state,
    grid_size,
    load_checkpoint,
    load_idx,
    make_batches,
    normalize,
    parse_grid,
    read_idx_images,
    read_pgm,
    save_checkpoint,
    tile_images,
    write_idx_images,
    write_image_grid,
)
from capsgan.utils.exceptions import (
    CheckpointFormatError,
    CheckpointMagicError,
    CheckpointNotFoundError,
    CheckpointSizeError,
    CheckpointVersionError,
    DatasetNotFoundError,
    IdxCountMismatchError,
    IdxDimensionError,
    IdxHeaderError,
    IdxLabelRangeError,
    IdxMagicError,
    IdxSizeError,
    IdxTruncatedError,
    ShapeError,
    UsageException,
)
from tests.conftest import random_dataset, write_idx_pair


class TestIdx:
    def test_load_pair(self, idx_files):
        images, labels = idx_files
        dataset = load_idx(images, labels)
        assert dataset.images.shape == (64, 1, 28, 28)
        assert dataset.images.dtype == np.float32
        assert dataset.images.min() >= -1.0 and dataset.images.max() <= 1.0
        np.testing.assert_array_equal(dataset.labels, np.arange(64) % 10)

    def test_pixels_survive_normalization(self, tmp_path):
        pixels = np.random.default_rng(3).integers(0, 256, (5, 28, 28), dtype=np.uint8)
        write_idx_images(tmp_path / "x", pixels)
        dataset = load_idx(tmp_path / "x")
        np.testing.assert_array_equal(denormalize(dataset.images[:, 0]), pixels)
        assert dataset.labels is None

    def test_normalize_endpoints(self):
        np.testing.assert_array_equal(normalize(np.array([0, 255], np.uint8)), [-1.0, 1.0])

    def test_gzipped_file(self, tmp_path, idx_files):
        images, _ = idx_files
        packed = tmp_path / "images.gz"
        packed.write_bytes(gzip.compress(images.read_bytes()))
        np.testing.assert_array_equal(read_idx_images(packed), read_idx_images(images))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetNotFoundError):
            load_idx(tmp_path / "absent")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x"
        path.write_bytes(struct.pack(">IIII", LABEL_MAGIC, 1, 28, 28) + bytes(784))
        with pytest.raises(IdxMagicError):
            load_idx(path)

    def test_short_header(self, tmp_path):
        path = tmp_path / "x"
        path.write_bytes(struct.pack(">II", IMAGE_MAGIC, 1))
        with pytest.raises(IdxHeaderError):
            load_idx(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "x"
        path.write_bytes(struct.pack(">IIII", IMAGE_MAGIC, 2, 28, 28) + bytes(784 + 10))
        with pytest.raises(IdxTruncatedError):
            load_idx(path)

    @pytest.mark.parametrize("kind", ["images", "labels"])
    def test_trailing_bytes(self, tmp_path, kind):
        images, labels = write_idx_pair(tmp_path, 3)
        path = images if kind == "images" else labels
        path.write_bytes(path.read_bytes() + bytes(5))
        with pytest.raises(IdxSizeError) as excinfo:
            load_idx(images, labels)
        assert excinfo.value.exit_code == 3
        assert excinfo.value.details["found"] - excinfo.value.details["expected"] == 5

    def test_empty_file(self, tmp_path):
        path = tmp_path / "x"
        path.write_bytes(struct.pack(">IIII", IMAGE_MAGIC, 0, 28, 28))
        with pytest.raises(IdxTruncatedError):
            load_idx(path)

    def test_wrong_dimensions(self, tmp_path):
        path = tmp_path / "x"
        write_idx_images(path, np.zeros((2, 32, 32), np.uint8))
        with pytest.raises(IdxDimensionError):
            load_idx(path)

    def test_count_mismatch(self, tmp_path):
        images, _ = write_idx_pair(tmp_path, 6, name="a")
        _, labels = write_idx_pair(tmp_path, 5, name="b")
        with pytest.raises(IdxCountMismatchError):
            load_idx(images, labels)

    def test_label_out_of_range(self, tmp_path):
        images, labels = write_idx_pair(tmp_path, 3)
        labels.write_bytes(struct.pack(">II", LABEL_MAGIC, 3) + bytes([0, 10, 1]))
        with pytest.raises(IdxLabelRangeError):
            load_idx(images, labels)

    def test_subset_and_split(self):
        dataset = random_dataset(10, labels=np.arange(10))
        assert len(dataset.subset(4)) == 4 and dataset.subset(None) is dataset
        head, tail = dataset.split(0.2)
        assert (len(head), len(tail)) == (8, 2)
        np.testing.assert_array_equal(tail.labels, [8, 9])


class TestBatching:
    def test_full_batches_only(self):
        batches = make_batches(random_dataset(10, labels=np.arange(10)), 4, seed=0, epoch=0)
        assert [images.shape[0] for images, _ in batches] == [4, 4]

    def test_every_item_once_per_epoch(self):
        dataset = random_dataset(12, labels=np.arange(12))
        seen = np.concatenate([labels for _, labels in make_batches(dataset, 3, seed=1, epoch=0)])
        np.testing.assert_array_equal(np.sort(seen), np.arange(12))

    def test_order_depends_on_seed_and_epoch(self):
        dataset = random_dataset(32, labels=np.arange(32))
        order = lambda seed, epoch: np.concatenate(  # noqa: E731
            [labels for _, labels in make_batches(dataset, 8, seed, epoch)]
        )
        np.testing.assert_array_equal(order(1, 0), order(1, 0))
        assert not np.array_equal(order(1, 0), order(1, 1))
        assert not np.array_equal(order(1, 0), order(2, 0))

    def test_batch_larger_than_dataset(self):
        assert make_batches(random_dataset(3), 4, seed=0, epoch=0) == []

    def test_batch_must_be_positive(self):
        with pytest.raises(UsageException):
            make_batches(random_dataset(3), 0, seed=0, epoch=0)


class TestImageGrid:
    def test_grid_width(self):
        assert grid_size(8, 8) == (238, 238)
        assert grid_size(2, 3) == (58, 88)

    def test_endpoint_mapping(self):
        samples = np.stack([np.full((1, 28, 28), -1.0), np.full((1, 28, 28), 1.0)]).astype(np.float32)
        canvas = tile_images(samples, 1, 2)
        assert canvas.shape == (28, 58)
        assert canvas[0, 0] == 0 and canvas[0, 30] == 255
        assert np.all(canvas[:, 28:30] == 0)

    def test_written_pgm_reparses(self, tmp_path, rng):
        samples = rng.uniform(-1, 1, (5, 1, 28, 28)).astype(np.float32)
        path = write_image_grid(samples, 2, 3, tmp_path / "grid.pgm")
        raw = path.read_bytes()
        assert raw.startswith(b"P5")
        np.testing.assert_array_equal(read_pgm(path), tile_images(samples, 2, 3))
        assert read_pgm(path)[30:, 60:].max() == 0

    def test_too_many_samples(self):
        with pytest.raises(ShapeError):
            tile_images(np.zeros((5, 1, 28, 28), np.float32), 2, 2)

    def test_parse_grid(self):
        assert parse_grid("8x8") == (8, 8)
        assert parse_grid("2X5") == (2, 5)
        for bad in ("8", "ax2", "0x3"):
            with pytest.raises(ShapeError):
                parse_grid(bad)


def sample_checkpoint() -> ModelCheckpoint:
    return ModelCheckpoint(
        architecture="capsgan1",
        seed=42,
        step=1500,
        tensors={
            "discriminator.conv.weight": np.arange(24, dtype=np.float32).reshape(2, 3, 2, 2),
            "generator.contraction": np.array([0.25, -0.5], np.float32),
            "scalar": np.array(3.0, np.float32),
            "optim/generator/m/contraction": np.array([0.01, 0.02], np.float32),
        },
        attributes={"kind": "gan", "g_loss": "non_saturating"},
        counters={"epoch": 3, "optim/generator/t": 1500},
    )


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        checkpoint = sample_checkpoint()
        path = save_checkpoint(checkpoint, tmp_path / "ckpt")
        loaded = load_checkpoint(path)
        assert (loaded.architecture, loaded.seed, loaded.step, loaded.version) == ("capsgan1", 42, 1500, 2)
        assert loaded.attributes == checkpoint.attributes
        assert loaded.counters == checkpoint.counters
        assert list(loaded.tensors) == list(checkpoint.tensors)
        for name, value in checkpoint.tensors.items():
            np.testing.assert_array_equal(loaded.tensors[name], value)
            assert loaded.tensors[name].shape == value.shape
        assert encode_checkpoint(loaded) == path.read_bytes()
        assert not (tmp_path / "ckpt.partial").exists()

    def test_size_accounting(self):
        checkpoint = sample_checkpoint()
        raw = encode_checkpoint(checkpoint)
        assert checkpoint.payload_bytes() == (24 + 2 + 1 + 2) * 4
        header, state = encode_header(checkpoint), encode_state(checkpoint)
        network_bytes = (24 + 2 + 1) * 4
        assert len(raw) == len(header) + network_bytes + len(state)
        assert raw.startswith(header) and raw.endswith(state)
        assert raw.startswith(MAGIC)
        assert struct.unpack("<I", raw[8:12])[0] == 2

    def test_sections_in_order(self):
        raw = encode_checkpoint(sample_checkpoint())
        names = [raw.find(name) for name in (b"capsgan1", b"discriminator.conv.weight", b"optim/generator/m/contraction",
                                              b"optim/generator/t", b"non_saturating")]
        assert names == sorted(names) and -1 not in names
        # seed and step close the rng section, just before the attribute count
        attributes = struct.pack("<I", 2) + struct.pack("<I", 4) + b"kind"
        rng = raw[raw.rfind(attributes) - 16:raw.rfind(attributes)]
        assert struct.unpack("<QQ", rng) == (42, 1500)

    def test_undecodable_name(self):
        raw = bytearray(encode_checkpoint(sample_checkpoint()))
        at = raw.find(b"capsgan1")
        raw[at:at + 2] = b"\xff\xfe"
        with pytest.raises(CheckpointFormatError) as excinfo:
            decode_checkpoint(bytes(raw))
        assert excinfo.value.exit_code == 4

    def test_subset_strips_prefix(self):
        assert list(sample_checkpoint().subset("generator")) == ["contraction"]

    def test_bad_magic(self):
        with pytest.raises(CheckpointMagicError):
            decode_checkpoint(b"NOTACKPT" + bytes(32))

    def test_unsupported_version(self):
        raw = bytearray(encode_checkpoint(sample_checkpoint()))
        raw[8:12] = struct.pack("<I", 1)
        with pytest.raises(CheckpointVersionError):
            decode_checkpoint(bytes(raw))

    def test_truncated_payload(self):
        raw = encode_checkpoint(sample_checkpoint())
        with pytest.raises(CheckpointSizeError):
            decode_checkpoint(raw[:-4])

    def test_extra_bytes(self):
        with pytest.raises(CheckpointSizeError):
            decode_checkpoint(encode_checkpoint(sample_checkpoint()) + bytes(4))

    def test_truncated_header(self):
        header = encode_header(sample_checkpoint())
        with pytest.raises(CheckpointSizeError):
            decode_checkpoint(header[:20])

    def test_not_found(self, tmp_path):
        with pytest.raises(CheckpointNotFoundError):
            load_checkpoint(tmp_path / "missing")
