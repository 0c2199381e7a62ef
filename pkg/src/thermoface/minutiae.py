"""Minutiae detection on thinned ridge maps and block-count feature vectors."""
import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BlockSizeInvalid, FormatError
from .raster import check_binary, check_gray


class Kind(enum.Enum):
    TERMINATION = "termination"
    BIFURCATION = "bifurcation"
    NORMAL = "normal"


@dataclass(frozen=True)
class Minutia:
    x: int
    y: int
    kind: Kind


@dataclass
class FeatureVector:
    block_size: int
    grid_w: int
    grid_h: int
    counts: np.ndarray  # row-major, length grid_w * grid_h

    @property
    def total(self):
        return int(self.counts.sum())


def classify_pixel(window):
    """Classify the center of a 3x3 binary window by its neighbor count.

    Returns ``None`` for a background center, ``Kind.TERMINATION`` for one
    neighbor, ``Kind.BIFURCATION`` for three, and ``Kind.NORMAL`` otherwise
    (including isolated points and crossings with four or more neighbors).
    """
    w = np.asarray(window)
    if w.shape != (3, 3):
        raise ValueError(f"expected a 3x3 window, got shape {w.shape}")
    if not w[1, 1]:
        return None
    n = int(np.count_nonzero(w)) - 1
    if n == 1:
        return Kind.TERMINATION
    if n == 3:
        return Kind.BIFURCATION
    return Kind.NORMAL


def neighbor_counts(ridges):
    """Number of 8-neighbors set, for interior pixels; border entries are -1."""
    r = check_binary(ridges).astype(np.int16)
    h, w = r.shape
    out = np.full((h, w), -1, dtype=np.int16)
    if h < 3 or w < 3:
        return out
    out[1:-1, 1:-1] = (r[:-2, :-2] + r[:-2, 1:-1] + r[:-2, 2:]
                       + r[1:-1, :-2] + r[1:-1, 2:]
                       + r[2:, :-2] + r[2:, 1:-1] + r[2:, 2:])
    return out


def extract_minutiae(ridges):
    """Terminations and bifurcations of a (thinned) ridge map, raster order.

    Only pixels with a full 3x3 window are examined.
    """
    r = check_binary(ridges)
    counts = neighbor_counts(r)
    on = r == 1
    kinds = np.zeros(r.shape, dtype=np.int8)
    kinds[on & (counts == 1)] = 1
    kinds[on & (counts == 3)] = 2
    ys, xs = np.nonzero(kinds)
    lookup = {1: Kind.TERMINATION, 2: Kind.BIFURCATION}
    return [Minutia(int(x), int(y), lookup[int(kinds[y, x])]) for y, x in zip(ys, xs)]


def block_features(ms, width, height, block_size):
    """Count minutiae per ``block_size`` square block, both kinds pooled.

    The grid covers the image with ``ceil(width / block_size)`` columns; partial
    blocks at the right and bottom edges are kept.
    """
    if int(block_size) != block_size or block_size < 1:
        raise BlockSizeInvalid(f"block size must be a positive integer, got {block_size}")
    block_size = int(block_size)
    grid_w = math.ceil(width / block_size)
    grid_h = math.ceil(height / block_size)
    counts = np.zeros(grid_w * grid_h, dtype=np.int64)
    for m in ms:
        if not (0 <= m.x < width and 0 <= m.y < height):
            raise ValueError(f"minutia ({m.x}, {m.y}) outside {width}x{height} image")
        counts[(m.y // block_size) * grid_w + m.x // block_size] += 1
    return FeatureVector(block_size=block_size, grid_w=grid_w, grid_h=grid_h, counts=counts)


# --- file formats -------------------------------------------------------------

def write_minutiae_csv(path, ms):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y", "kind"])
        for m in ms:
            wr.writerow([m.x, m.y, m.kind.value])


def read_minutiae_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "y", "kind"]:
        raise FormatError(f"{path}: missing 'x,y,kind' header")
    try:
        return [Minutia(int(x), int(y), Kind(kind)) for x, y, kind in rows[1:]]
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_features_csv(path, rows):
    """Write ``(label, counts)`` pairs as ``label,c0,c1,...`` lines after a header."""
    rows = list(rows)
    width = len(rows[0][1]) if rows else 0
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["label"] + [f"c{i}" for i in range(width)])
        for label, counts in rows:
            counts = np.asarray(counts)
            if counts.size != width:
                raise ValueError("all feature vectors in one file must share a length")
            wr.writerow([label] + [int(c) for c in counts])


def read_features_csv(path):
    """Load a feature CSV; returns ``(labels, X)`` with ``X`` as float64."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and rows[0] and rows[0][0] == "label":
        rows = rows[1:]
    if not rows:
        return [], np.zeros((0, 0))
    width = len(rows[0]) - 1
    labels = []
    X = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        if len(r) - 1 != width:
            raise FormatError(f"{path}: row {i + 1} has {len(r) - 1} values, expected {width}")
        labels.append(r[0])
        try:
            X[i] = [float(v) for v in r[1:]]
        except ValueError as exc:
            raise FormatError(f"{path}: row {i + 1}: {exc}") from exc
    return labels, X


TERMINATION_RGB = (255, 0, 0)
BIFURCATION_RGB = (0, 255, 0)


def overlay(gray, ms, ridges=None, radius=1):
    """Color overlay: ridges in white, terminations red, bifurcations green."""
    gray = check_gray(gray)
    rgb = np.repeat((gray // 2)[..., None], 3, axis=2)
    if ridges is not None:
        rgb[check_binary(ridges) == 1] = 255
    h, w = gray.shape
    for m in ms:
        color = TERMINATION_RGB if m.kind is Kind.TERMINATION else BIFURCATION_RGB
        y0, y1 = max(m.y - radius, 0), min(m.y + radius + 1, h)
        x0, x1 = max(m.x - radius, 0), min(m.x + radius + 1, w)
        rgb[y0:y1, x0:x1] = color
    return rgb
