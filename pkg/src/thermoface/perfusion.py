"""Sobel gradients, gradient thresholding and ridge thinning."""
from dataclasses import dataclass

import numba
import numpy as np

from .errors import ImageTooSmall
from .raster import check_binary, check_gray

# correlation masks, y growing downward
SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int64)
SOBEL_Y = np.array([[1, 2, 1], [0, 0, 0], [-1, -2, -1]], dtype=np.int64)

NORMS = ("L2", "L1")


@dataclass
class GradientField:
    px: np.ndarray
    py: np.ndarray
    magnitude: np.ndarray
    orientation: np.ndarray
    valid: np.ndarray  # False on the 1-pixel border
    norm: str = "L2"

    @property
    def shape(self):
        return self.px.shape


def sobel(img, norm="L2"):
    """Sobel responses, gradient magnitude and orientation.

    ``magnitude`` is ``sqrt(px^2 + py^2)`` for L2 and ``|px| + |py|`` for L1.
    ``orientation`` is ``arctan2(py, px)``. The outer ring has no full 3x3
    window and is zeroed and flagged invalid.
    """
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    img = check_gray(img)
    h, w = img.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(f"sobel needs at least 3x3 pixels, got {w}x{h}")
    p = img.astype(np.int64)
    px = np.zeros((h, w), dtype=np.int64)
    py = np.zeros((h, w), dtype=np.int64)
    px[1:-1, 1:-1] = ((p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:])
                      - (p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2]))
    py[1:-1, 1:-1] = ((p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:])
                      - (p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:]))
    fx = px.astype(np.float64)
    fy = py.astype(np.float64)
    if norm == "L2":
        mag = np.hypot(fx, fy)
    else:
        mag = np.abs(fx) + np.abs(fy)
    valid = np.zeros((h, w), dtype=bool)
    valid[1:-1, 1:-1] = True
    theta = np.where(valid, np.arctan2(fy, fx), 0.0)
    return GradientField(px=px, py=py, magnitude=mag, orientation=theta,
                         valid=valid, norm=norm)


def binarize_gradient(g, threshold="mean"):
    """1 where the magnitude strictly exceeds a threshold over interior pixels.

    ``threshold`` is ``"mean"`` or a percentile in [0, 100] of the interior
    magnitudes. Border pixels are always 0.
    """
    interior = g.magnitude[g.valid]
    if interior.size == 0:
        return np.zeros(g.shape, dtype=np.uint8)
    if threshold == "mean":
        thr = interior.mean()
    else:
        q = float(threshold)
        if not 0.0 <= q <= 100.0:
            raise ValueError(f"percentile threshold must lie in [0, 100], got {q}")
        thr = np.percentile(interior, q)
    return ((g.magnitude > thr) & g.valid).astype(np.uint8)


def gradient_rows(g):
    """Yield ``(x, y, px, py, magnitude, orientation)`` for every pixel, raster order."""
    h, w = g.shape
    for y in range(h):
        for x in range(w):
            yield (x, y, int(g.px[y, x]), int(g.py[y, x]),
                   float(g.magnitude[y, x]), float(g.orientation[y, x]))


# --- thinning ---------------------------------------------------------------

# neighbor order P2..P9: N, NE, E, SE, S, SW, W, NW as (dy, dx)
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def _components(bits, adjacent):
    """Number of connected groups among the ring positions in ``bits``."""
    seen = set()
    count = 0
    for start in bits:
        if start in seen:
            continue
        count += 1
        stack = [start]
        seen.add(start)
        while stack:
            i = stack.pop()
            for j in bits:
                if j not in seen and adjacent(_RING[i], _RING[j]):
                    seen.add(j)
                    stack.append(j)
    return count


def _adj8(p, q):
    return max(abs(p[0] - q[0]), abs(p[1] - q[1])) == 1


def _adj4(p, q):
    return abs(p[0] - q[0]) + abs(p[1] - q[1]) == 1


def is_simple(code):
    """Whether deleting the center keeps 8-foreground / 4-background topology.

    ``code`` packs the eight neighbors, bit k set when ``_RING[k]`` is 1.
    """
    fg = [k for k in range(8) if code >> k & 1]
    bg = [k for k in range(8) if not code >> k & 1]
    if not fg or _components(fg, _adj8) != 1:
        return False
    # background components that touch the center through a 4-neighbor
    touching = [k for k in bg if k % 2 == 0]
    if not touching:
        return False
    groups = 0
    seen = set()
    for k in touching:
        if k in seen:
            continue
        groups += 1
        stack = [k]
        seen.add(k)
        while stack:
            i = stack.pop()
            for j in bg:
                if j not in seen and _adj4(_RING[i], _RING[j]):
                    seen.add(j)
                    stack.append(j)
    return groups == 1


def _build_tables():
    table = np.zeros((2, 256), dtype=np.uint8)
    for code in range(256):
        n = [code >> k & 1 for k in range(8)]
        p2, p4, p6, p8 = n[0], n[2], n[4], n[6]
        if sum(n) < 2 or not is_simple(code):
            continue
        # first pass removes south-east boundary points, second north-west
        if p2 * p4 * p6 == 0 and p4 * p6 * p8 == 0:
            table[0, code] = 1
        if p2 * p4 * p8 == 0 and p2 * p6 * p8 == 0:
            table[1, code] = 1
    return table


DELETABLE = _build_tables()
SIMPLE = np.array([is_simple(code) for code in range(256)], dtype=np.uint8)


@numba.njit(cache=True)
def _neighbor_code(img, y, x):
    code = 0
    if img[y - 1, x]:
        code |= 1
    if img[y - 1, x + 1]:
        code |= 2
    if img[y, x + 1]:
        code |= 4
    if img[y + 1, x + 1]:
        code |= 8
    if img[y + 1, x]:
        code |= 16
    if img[y + 1, x - 1]:
        code |= 32
    if img[y, x - 1]:
        code |= 64
    if img[y - 1, x - 1]:
        code |= 128
    return code


@numba.njit(cache=True)
def _thin(img, table, simple):
    h, w = img.shape
    cand_y = np.empty(h * w, dtype=np.int64)
    cand_x = np.empty(h * w, dtype=np.int64)
    changed = True
    while changed:
        changed = False
        for sub in range(2):
            # candidates come from the state at the start of the sub-iteration
            n = 0
            for y in range(1, h - 1):
                for x in range(1, w - 1):
                    if img[y, x] and table[sub, _neighbor_code(img, y, x)]:
                        cand_y[n] = y
                        cand_x[n] = x
                        n += 1
            # endpoints are judged on the snapshot, topology on the live image
            for k in range(n):
                y = cand_y[k]
                x = cand_x[k]
                if simple[_neighbor_code(img, y, x)]:
                    img[y, x] = 0
                    changed = True
    return img


def thin(ridges):
    """Reduce ridges to unit width, preserving topology and ridge endpoints.

    Two directional sub-iterations (south-east, then north-west boundary
    points) repeat until nothing changes. A pixel is removed only when it is
    a simple point with at least two neighbors. Candidates of one
    sub-iteration are collected first, then removed one at a time after
    re-checking simplicity against the current image, so no component
    vanishes or splits.
    """
    ridges = check_binary(ridges)
    # a zero frame keeps every 3x3 window in bounds
    padded = np.zeros((ridges.shape[0] + 2, ridges.shape[1] + 2), dtype=np.uint8)
    padded[1:-1, 1:-1] = ridges
    return _thin(padded, DELETABLE, SIMPLE)[1:-1, 1:-1].copy()
