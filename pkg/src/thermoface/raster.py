"""Raster containers, grayscale conversion, mean binarization and PNM I/O.

Images are plain numpy arrays indexed ``[row, column]`` with a top-left origin:

* color image: ``(H, W, 3)`` uint8
* gray image: ``(H, W)`` uint8
* binary image: ``(H, W)`` uint8 holding only 0 and 1
"""
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import UnreadableImage

# ITU-R BT.601 luma, as integer thousandths so rounding is exact
LUMA_WEIGHTS = (299, 587, 114)


def check_color(img):
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected an (H, W, 3) color image, got shape {img.shape}")
    if img.size and (img.min() < 0 or img.max() > 255):
        raise ValueError("color channels must lie in [0, 255]")
    return img.astype(np.uint8, copy=False)


def check_gray(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected an (H, W) gray image, got shape {img.shape}")
    if img.min() < 0 or img.max() > 255:
        raise ValueError("gray values must lie in [0, 255]")
    return img.astype(np.uint8, copy=False)


def check_binary(img):
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected an (H, W) binary image, got shape {img.shape}")
    if img.dtype == bool:
        return img.astype(np.uint8)
    if not np.isin(img, (0, 1)).all():
        raise ValueError("binary image may only hold 0 and 1")
    return img.astype(np.uint8, copy=False)


def to_grayscale(img):
    """Convert an RGB image to 8-bit luma, ``round(0.299 r + 0.587 g + 0.114 b)``.

    Halves round up. The result is always inside [0, 255] because the weights
    sum to one.
    """
    img = check_color(img).astype(np.int64)
    wr, wg, wb = LUMA_WEIGHTS
    acc = wr * img[..., 0] + wg * img[..., 1] + wb * img[..., 2]
    return ((acc + 500) // 1000).clip(0, 255).astype(np.uint8)


def binarize_mean(img):
    """1 where a pixel is strictly brighter than the image mean, else 0.

    The comparison ``p > sum / n`` is evaluated as ``p * n > sum`` in integers,
    so ties are decided exactly and go to the background.
    """
    img = check_gray(img).astype(np.int64)
    total = int(img.sum())
    return (img * img.size > total).astype(np.uint8)


def ensure_gray(img):
    """Accept either a gray or a color image and return a gray one."""
    img = np.asarray(img)
    if img.ndim == 3:
        return to_grayscale(img)
    return check_gray(img)


def read_pnm(path):
    """Read an 8-bit PGM (P5) or PPM (P6) file.

    Returns an ``(H, W)`` array for PGM and ``(H, W, 3)`` for PPM.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format not in ("PPM", "PGM"):
                raise UnreadableImage(path, f"not a PNM file ({im.format})")
            im.load()
            if im.mode in ("L", "RGB"):
                return np.array(im, dtype=np.uint8)
            raise UnreadableImage(path, f"unsupported PNM mode {im.mode}")
    except (OSError, UnidentifiedImageError, SyntaxError, ValueError) as exc:
        if isinstance(exc, UnreadableImage):
            raise
        raise UnreadableImage(path, str(exc)) from exc


def write_pgm(path, img):
    Image.fromarray(np.ascontiguousarray(check_gray(img))).save(path, format="PPM")


def write_binary_pgm(path, img):
    """Store a {0, 1} image as a P5 file with values 0 / 255."""
    write_pgm(path, check_binary(img) * np.uint8(255))


def write_ppm(path, img):
    Image.fromarray(np.ascontiguousarray(check_color(img))).save(path, format="PPM")

