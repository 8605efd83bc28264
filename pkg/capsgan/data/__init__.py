"""Dataset ingestion, batching, sample grids and checkpoints."""

from capsgan.data.idx import (
    IMAGE_MAGIC,
    LABEL_MAGIC,
    Dataset,
    denormalize,
    load_idx,
    normalize,
    read_idx_images,
    read_idx_labels,
    write_idx_images,
    write_idx_labels,
)
from capsgan.data.batching import make_batches, shuffled_order
from capsgan.data.image_grid import grid_size, parse_grid, read_pgm, tile_images, write_image_grid
from capsgan.data.checkpoint import (
    MAGIC,
    VERSION,
    ModelCheckpoint,
    decode_checkpoint,
    encode_checkpoint,
    encode_header,
    encode_state,
    load_checkpoint,
    save_checkpoint,
)

__all__ = [
    "IMAGE_MAGIC",
    "LABEL_MAGIC",
    "Dataset",
    "denormalize",
    "load_idx",
    "normalize",
    "read_idx_images",
    "read_idx_labels",
    "write_idx_images",
    "write_idx_labels",
    "make_batches",
    "shuffled_order",
    "grid_size",
    "parse_grid",
    "read_pgm",
    "tile_images",
    "write_image_grid",
    "MAGIC",
    "VERSION",
    "ModelCheckpoint",
    "decode_checkpoint",
    "encode_checkpoint",
    "encode_header",
    "encode_state",
    "load_checkpoint",
    "save_checkpoint",
]
