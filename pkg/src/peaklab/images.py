"""8-bit raster loading, validation, and atomic saving shared by all pipeline stages."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

MIN_SIDE = 16

_LOSSLESS_SUFFIXES = (".png",)
_LOSSY_SUFFIXES = (".jpg", ".jpeg")


def validate_raster(image: np.ndarray) -> np.ndarray:
    """Check that ``image`` is an 8-bit raster the pipeline accepts.

    Accepted shapes are (H, W) for grayscale and (H, W, C) with C in {1, 3}.
    Both sides must be at least MIN_SIDE pixels. Returns the array unchanged.
    """
    if not isinstance(image, np.ndarray):
        raise TypeError(f"expected numpy array, got {type(image).__name__}")
    if image.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got dtype {image.dtype}")
    if image.ndim == 3:
        if image.shape[2] not in (1, 3):
            raise ValueError(f"expected 1 or 3 channels, got {image.shape[2]}")
    elif image.ndim != 2:
        raise ValueError(f"expected a 2-D or 3-D array, got {image.ndim} dimensions")
    height, width = image.shape[:2]
    if height < MIN_SIDE or width < MIN_SIDE:
        raise ValueError(
            f"image is {height}x{width}; both sides must be at least {MIN_SIDE}"
        )
    return image


def channel_count(image: np.ndarray) -> int:
    return 1 if image.ndim == 2 else image.shape[2]


def iter_channels(image: np.ndarray):
    """Yield each channel of a validated raster as a 2-D float64 matrix."""
    if image.ndim == 2:
        yield image.astype(np.float64)
    else:
        for c in range(image.shape[2]):
            yield image[:, :, c].astype(np.float64)


def channel_mean(image: np.ndarray) -> np.ndarray:
    """Average the channels of a validated raster into one float64 matrix."""
    if image.ndim == 2:
        return image.astype(np.float64)
    return image.astype(np.float64).mean(axis=2)


def stack_channels(channels: list[np.ndarray], ndim: int) -> np.ndarray:
    """Reassemble channel matrices into the shape of the source image."""
    if ndim == 2:
        return channels[0]
    return np.stack(channels, axis=2)


def load_image(path: str | os.PathLike, allow_lossy: bool = False) -> np.ndarray:
    """Decode one image file into a validated uint8 array.

    PNG is always accepted; JPEG only when ``allow_lossy`` is set. Images with
    an alpha channel or more than 8 bits per sample are rejected rather than
    silently converted.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in _LOSSY_SUFFIXES and not allow_lossy:
        raise ValueError(f"{path}: lossy input requires allow_lossy")
    if suffix not in _LOSSLESS_SUFFIXES + _LOSSY_SUFFIXES:
        raise ValueError(f"{path}: unsupported file type {suffix!r}")
    with Image.open(path) as img:
        mode = img.mode
        if mode in ("RGBA", "LA", "PA") or "transparency" in img.info:
            raise ValueError(f"{path}: alpha channels are not supported")
        if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
            raise ValueError(f"{path}: only 8-bit samples are supported")
        if mode == "P":
            img = img.convert("RGB")
        elif mode not in ("L", "RGB"):
            img = img.convert("RGB") if len(img.getbands()) > 1 else img.convert("L")
        array = np.asarray(img, dtype=np.uint8)
    return validate_raster(array)


def save_image_atomic(array: np.ndarray, path: str | os.PathLike) -> None:
    """Write a validated raster as PNG via a temp file and atomic rename."""
    validate_raster(array)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = array if array.ndim == 2 else array.squeeze(axis=2) if array.shape[2] == 1 else array
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            Image.fromarray(data).save(handle, format="PNG", optimize=False)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def list_images(root: str | os.PathLike, allow_lossy: bool = False) -> list[Path]:
    """Collect image paths under ``root``, sorted for reproducible ordering."""
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"{root}: not a directory")
    suffixes = _LOSSLESS_SUFFIXES + (_LOSSY_SUFFIXES if allow_lossy else ())
    found = [p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in suffixes]
    return sorted(found)
