"""Axis estimation, midpoint ellipse rasterization and elliptic cropping."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateAxis, EmptyMask
from .raster import check_binary, check_gray
from .segmentation import Centroid


def nearest_int(v):
    """Round half up; Python's round() uses banker's rounding."""
    return int(np.floor(v + 0.5))


@dataclass(frozen=True)
class EllipseSpec:
    """Axis-aligned ellipse; ``semi_major_a`` is vertical, ``semi_minor_b`` horizontal."""

    center: Centroid
    semi_major_a: int
    semi_minor_b: int
    scale_major: float = 1.0
    scale_minor: float = 1.0
    raw_major: float = field(default=0.0, compare=False)
    raw_minor: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.semi_major_a < 1 or self.semi_minor_b < 1:
            raise ValueError("ellipse semi-axes must be >= 1 pixel")

    @property
    def pixel_center(self):
        return nearest_int(self.center.x), nearest_int(self.center.y)


def estimate_axes(mask, c, scale_major=1.0, scale_minor=1.0):
    """Derive semi-axes from the face mask extents through the centroid.

    The vertical semi-axis runs from the centroid up to the topmost foreground
    pixel of the centroid column; the horizontal one from the centroid to the
    rightmost foreground pixel of the centroid row.
    """
    mask = check_binary(mask)
    if not mask.any():
        raise EmptyMask("cannot estimate axes of an empty mask")
    h, w = mask.shape
    col = min(max(nearest_int(c.x), 0), w - 1)
    row = min(max(nearest_int(c.y), 0), h - 1)

    rows = np.flatnonzero(mask[:, col])
    raw_major = c.y - rows[0] if rows.size else 0.0
    cols = np.flatnonzero(mask[row, :])
    raw_minor = cols[-1] - c.x if cols.size else 0.0
    if raw_major <= 0:
        raise DegenerateAxis(f"no foreground above the centroid in column {col}")
    if raw_minor <= 0:
        raise DegenerateAxis(f"no foreground right of the centroid in row {row}")

    a = min(max(nearest_int(scale_major * raw_major), 1), h)
    b = min(max(nearest_int(scale_minor * raw_minor), 1), w)
    return EllipseSpec(center=c, semi_major_a=a, semi_minor_b=b,
                       scale_major=scale_major, scale_minor=scale_minor,
                       raw_major=float(raw_major), raw_minor=float(raw_minor))


def quadrant_arc(rx, ry):
    """Ordered first-quadrant boundary from (0, ry) to (rx, 0).

    Flat ellipses are traced as the transposed tall one: near the tip of a
    flat ellipse the y-stepping region lags more than half a pixel behind.
    """
    if rx > ry:
        return [(y, x) for x, y in reversed(_midpoint_arc(ry, rx))]
    return _midpoint_arc(rx, ry)


def _midpoint_arc(rx, ry):
    # decision variables scaled by 4 so half-pixel midpoints stay integral
    rx2, ry2 = rx * rx, ry * ry
    x, y = 0, ry
    pts = [(x, y)]
    # region 1: step in x while the slope at the next midpoint is shallower than -1
    d = 4 * ry2 - 4 * rx2 * ry + rx2
    while y > 0 and ry2 * (2 * x + 2) < rx2 * (2 * y - 1):
        if d < 0:
            d += 4 * ry2 * (2 * x + 3)
        else:
            d += 4 * ry2 * (2 * x + 3) - 8 * rx2 * (y - 1)
            y -= 1
        x += 1
        pts.append((x, y))
    # region 2: step in y, midpoint F(x + 1/2, y - 1)
    d = ry2 * (2 * x + 1) ** 2 + 4 * rx2 * (y - 1) ** 2 - 4 * rx2 * ry2
    while y > 0:
        if d > 0:
            d += 4 * rx2 * (3 - 2 * y)
        else:
            d += 8 * ry2 * (x + 1) + 4 * rx2 * (3 - 2 * y)
            x += 1
        y -= 1
        pts.append((x, y))
    # flat ellipses can reach y = 0 before x = rx
    while x < rx:
        x += 1
        pts.append((x, 0))
    return pts


def rasterize_ellipse(e):
    """Closed, 8-connected boundary of ``e`` as a set of ``(x, y)`` pixels."""
    cx, cy = e.pixel_center
    out = set()
    for dx, dy in quadrant_arc(e.semi_minor_b, e.semi_major_a):
        out.update(((cx + dx, cy + dy), (cx - dx, cy + dy),
                    (cx + dx, cy - dy), (cx - dx, cy - dy)))
    return out


def ellipse_mask(shape, e):
    """1 where ``(x-cx)^2/b^2 + (y-cy)^2/a^2 <= 1``, evaluated in integers."""
    h, w = shape
    cx, cy = e.pixel_center
    a2 = e.semi_major_a ** 2
    b2 = e.semi_minor_b ** 2
    ys = np.arange(h, dtype=np.int64)[:, None] - cy
    xs = np.arange(w, dtype=np.int64)[None, :] - cx
    return (xs * xs * a2 + ys * ys * b2 <= a2 * b2).astype(np.uint8)


def crop_ellipse(img, e):
    """Zero every pixel outside the ellipse; the canvas keeps its size."""
    img = check_gray(img)
    return np.where(ellipse_mask(img.shape, e) == 1, img, 0).astype(np.uint8)


def draw_points(shape, points):
    """Binary image with the given ``(x, y)`` points set, clipped to ``shape``."""
    h, w = shape
    out = np.zeros(shape, dtype=np.uint8)
    for x, y in points:
        if 0 <= x < w and 0 <= y < h:
            out[y, x] = 1
    return out
