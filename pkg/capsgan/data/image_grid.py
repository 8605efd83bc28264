"""Sample grids written as binary PGM."""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from capsgan.data.idx import denormalize
from capsgan.utils.exceptions import ShapeError

SEPARATOR = 2


def grid_size(rows: int, cols: int, tile: int = 28) -> tuple[int, int]:
    """(height, width) of a grid with 2-pixel separators between tiles."""
    return rows * tile + (rows - 1) * SEPARATOR, cols * tile + (cols - 1) * SEPARATOR


def tile_images(samples: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Denormalized uint8 mosaic; unused cells and separators stay black."""
    if samples.ndim != 4 or samples.shape[1] != 1:
        raise ShapeError("write_image_grid", "samples must be n x 1 x H x W", samples=samples.shape)
    n, _, tile_h, tile_w = samples.shape
    if n > rows * cols:
        raise ShapeError("write_image_grid", f"{n} samples do not fit a {rows}x{cols} grid", samples=samples.shape)

    height = rows * tile_h + (rows - 1) * SEPARATOR
    width = cols * tile_w + (cols - 1) * SEPARATOR
    canvas = np.zeros((height, width), dtype=np.uint8)
    pixels = denormalize(samples[:, 0])
    for index in range(n):
        top = (index // cols) * (tile_h + SEPARATOR)
        left = (index % cols) * (tile_w + SEPARATOR)
        canvas[top:top + tile_h, left:left + tile_w] = pixels[index]
    return canvas


def write_image_grid(samples: np.ndarray, rows: int, cols: int, path: Union[str, Path]) -> Path:
    """Tile `samples` in [-1, 1] row-major and save a P5 PGM with maxval 255."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # a 2D uint8 array is mode L, which the PPM writer saves as P5
    Image.fromarray(tile_images(np.asarray(samples), rows, cols)).save(path, format="PPM")
    return path


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    with Image.open(path) as image:
        return np.array(image.convert("L"), dtype=np.uint8)


def parse_grid(value: str) -> tuple[int, int]:
    """'8x8' -> (8, 8)."""
    try:
        rows, cols = (int(part) for part in value.lower().split("x"))
    except ValueError:
        raise ShapeError("grid", f"grid must look like ROWSxCOLS, got {value!r}")
    if rows < 1 or cols < 1:
        raise ShapeError("grid", f"grid dimensions must be positive, got {value!r}")
    return rows, cols
