"""8-bit PNG I/O, value-range mapping, and divisibility padding."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .wavelet import ImageGrid


def load_image(path) -> ImageGrid:
    """Read an 8-bit PNG (greyscale or RGB) into a [0, 1] float image."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image not found: {path}")
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return ImageGrid(data=arr / 255.0, value_range=(0.0, 1.0))


def save_image(grid: ImageGrid, path) -> Path:
    """Quantize a [0, 1] image to 8 bits and write a PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.clip(grid.data, 0.0, 1.0)
    q = np.rint(arr * 255.0).astype(np.uint8)
    if q.shape[2] == 1:
        Image.fromarray(q[:, :, 0], mode="L").save(path)
    elif q.shape[2] == 3:
        Image.fromarray(q, mode="RGB").save(path)
    else:
        raise ValueError(f"can only write 1- or 3-channel images, got {q.shape[2]}")
    return path


# The obvious maps 2x-1 and (y+1)/2 do not round-trip the 8-bit lattice
# exactly in float64; the scaled forms below do, for every k/255.
def normalize(grid: ImageGrid) -> ImageGrid:
    """[0, 1] -> [-1, 1], exact on 8-bit values."""
    lo, hi = grid.value_range
    if (lo, hi) != (0.0, 1.0):
        raise ValueError(f"expected a [0, 1] image, got range {grid.value_range}")
    return ImageGrid(data=(grid.data * 510.0 - 255.0) / 255.0, value_range=(-1.0, 1.0))


def denormalize(grid: ImageGrid) -> ImageGrid:
    """[-1, 1] -> [0, 1], exact inverse of normalize."""
    lo, hi = grid.value_range
    if (lo, hi) != (-1.0, 1.0):
        raise ValueError(f"expected a [-1, 1] image, got range {grid.value_range}")
    return ImageGrid(data=(grid.data * 255.0 + 255.0) / 510.0, value_range=(0.0, 1.0))


def pad_to_multiple(arr: np.ndarray, multiple: int):
    """Reflect-pad height/width up to the next multiple; returns the padded
    array and the original (H, W) for cropping back."""
    h, w = arr.shape[:2]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return arr, (h, w)
    if ph >= h or pw >= w:
        raise ValueError(
            f"image {h}x{w} is too small to reflect-pad to a multiple of {multiple}"
        )
    padded = np.pad(arr, ((0, ph), (0, pw), (0, 0)), mode="reflect")
    return padded, (h, w)


def crop_to(arr: np.ndarray, size) -> np.ndarray:
    h, w = size
    return arr[:h, :w]
