"""Two-pass connected-component labeling, largest component and centroid."""
from dataclasses import dataclass

import numba
import numpy as np

from .errors import EmptyMask
from .raster import check_binary


@dataclass
class LabelMap:
    """Per-pixel labels (0 = background, 1..component_count otherwise).

    ``areas[k]`` is the pixel count of label ``k``; ``areas[0]`` is always 0 so
    that ``areas.sum()`` equals the number of foreground pixels.
    """

    labels: np.ndarray
    component_count: int
    areas: np.ndarray

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]


@dataclass(frozen=True)
class Centroid:
    x: float  # column
    y: float  # row


@numba.njit(cache=True)
def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


@numba.njit(cache=True)
def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb


@numba.njit(cache=True)
def _two_pass(img, eight):
    h, w = img.shape
    labels = np.zeros((h, w), dtype=np.int32)
    parent = np.zeros(h * w + 1, dtype=np.int32)
    nxt = 1
    # scan-order neighbors already visited: W, N and, for 8-connectivity, NW, NE
    if eight:
        dys = np.array([0, -1, -1, -1])
        dxs = np.array([-1, -1, 0, 1])
    else:
        dys = np.array([0, -1])
        dxs = np.array([-1, 0])
    for y in range(h):
        for x in range(w):
            if img[y, x] == 0:
                continue
            best = 0
            for k in range(dys.shape[0]):
                ny = y + dys[k]
                nx = x + dxs[k]
                if ny < 0 or nx < 0 or nx >= w:
                    continue
                lab = labels[ny, nx]
                if lab == 0:
                    continue
                if best == 0 or lab < best:
                    best = lab
            if best == 0:
                parent[nxt] = nxt
                labels[y, x] = nxt
                nxt += 1
                continue
            labels[y, x] = best
            for k in range(dys.shape[0]):
                ny = y + dys[k]
                nx = x + dxs[k]
                if ny < 0 or nx < 0 or nx >= w:
                    continue
                lab = labels[ny, nx]
                if lab != 0 and lab != best:
                    _union(parent, best, lab)

    # second pass: resolve equivalences, renumber by first raster occurrence
    remap = np.zeros(nxt, dtype=np.int32)
    count = 0
    areas = np.zeros(nxt, dtype=np.int64)
    for y in range(h):
        for x in range(w):
            lab = labels[y, x]
            if lab == 0:
                continue
            root = _find(parent, lab)
            if remap[root] == 0:
                count += 1
                remap[root] = count
            final = remap[root]
            labels[y, x] = final
            areas[final] += 1
    return labels, count, areas[:count + 1].copy()


def label_components(img, connectivity=8):
    """Label the foreground of a binary image with the classic two-pass scheme.

    The first pass gives each pixel the smallest label among its already
    visited neighbors and records equivalences in a union-find forest; the
    second pass replaces every label by its class representative, numbered
    contiguously in order of first appearance.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    img = np.ascontiguousarray(check_binary(img))
    labels, count, areas = _two_pass(img, connectivity == 8)
    return LabelMap(labels=labels, component_count=int(count), areas=areas)


def largest_component(lm):
    """Mask of the component with the largest area; ties go to the lowest label."""
    if lm.component_count == 0:
        raise EmptyMask("no foreground component to extract")
    best = int(np.argmax(lm.areas[1:])) + 1
    return (lm.labels == best).astype(np.uint8)


def centroid(mask):
    """Mean column / row position of the 1-pixels of a binary mask."""
    mask = check_binary(mask)
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise EmptyMask("centroid of an empty mask is undefined")
    n = xs.size
    return Centroid(x=float(xs.sum()) / n, y=float(ys.sum()) / n)


def labels_to_pgm_array(lm):
    """Scale labels into [0, 255] for a debug dump. Lossy once labels exceed 255."""
    if lm.component_count == 0:
        return np.zeros_like(lm.labels, dtype=np.uint8)
    scaled = lm.labels.astype(np.int64) * 255 // lm.component_count
    return scaled.astype(np.uint8)
