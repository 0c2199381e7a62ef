"""Synthetic thermal faceprints with a known vessel skeleton per subject.

Each subject gets a fixed elliptical face blob and a random tree of 1-pixel
polylines that sits slightly warmer than the surrounding skin. Every image of
a subject is the same scene shifted by a small random translation plus
per-pixel Gaussian noise.
"""
import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import write_pgm


@dataclass(frozen=True)
class SynthParams:
    background: float = 60.0
    face: float = 150.0
    vessel_contrast: float = 45.0
    noise_sigma: float = 4.0
    max_shift: int = 1
    n_roots: int = 3
    depth: int = 3
    segment_length: tuple = (8, 16)


@dataclass
class Subject:
    face_center: tuple  # (x, y)
    face_axes: tuple  # (horizontal, vertical) semi-axes
    vessels: np.ndarray  # (H, W) uint8 skeleton, in the unshifted frame
    minutiae: list  # (x, y, kind) planted in the unshifted frame


def _line(x0, y0, x1, y1):
    """Integer points of a Bresenham segment, endpoints included."""
    pts = []
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        pts.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _inside(x, y, cx, cy, ax, ay, margin):
    return ((x - cx) / (ax - margin)) ** 2 + ((y - cy) / (ay - margin)) ** 2 <= 1.0


def make_subject(rng, size, params=SynthParams()):
    w, h = size
    cx = w / 2 + rng.uniform(-2, 2)
    cy = h / 2 + rng.uniform(-2, 2)
    ax = w * rng.uniform(0.30, 0.36)
    ay = h * rng.uniform(0.40, 0.45)
    vessels = np.zeros((h, w), dtype=np.uint8)
    degree = {}
    margin = 6
    lo, hi = params.segment_length

    def grow(x, y, angle, level):
        length = rng.uniform(lo, hi)
        x1 = int(round(x + length * math.cos(angle)))
        y1 = int(round(y + length * math.sin(angle)))
        if not _inside(x1, y1, cx, cy, ax, ay, margin):
            return
        pts = _line(x, y, x1, y1)
        # refuse segments that would touch an existing vessel away from their start
        for px, py in pts[2:]:
            if vessels[py - 1:py + 2, px - 1:px + 2].any():
                return
        for px, py in pts:
            vessels[py, px] = 1
        degree[(x, y)] = degree.get((x, y), 0) + 1
        degree[(x1, y1)] = degree.get((x1, y1), 0) + 1
        if level + 1 < params.depth:
            spread = rng.uniform(0.5, 0.9)
            grow(x1, y1, angle - spread, level + 1)
            grow(x1, y1, angle + spread, level + 1)

    for _ in range(params.n_roots):
        for _attempt in range(20):
            x0 = int(round(cx + rng.uniform(-0.6, 0.6) * ax))
            y0 = int(round(cy + rng.uniform(-0.6, 0.6) * ay))
            if _inside(x0, y0, cx, cy, ax, ay, margin) and not vessels[y0 - 2:y0 + 3, x0 - 2:x0 + 3].any():
                break
        else:
            continue
        grow(x0, y0, rng.uniform(0, 2 * math.pi), 0)

    minutiae = []
    for (x, y), d in sorted(degree.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if d == 1:
            minutiae.append((x, y, "termination"))
        elif d == 3:
            minutiae.append((x, y, "bifurcation"))
    return Subject((cx, cy), (ax, ay), vessels, minutiae)


def render(subject, size, rng, params=SynthParams(), noise_sigma=None):
    """One noisy, shifted image of ``subject``; returns ``(gray, (dx, dy))``."""
    w, h = size
    sigma = params.noise_sigma if noise_sigma is None else noise_sigma
    dx = int(rng.integers(-params.max_shift, params.max_shift + 1))
    dy = int(rng.integers(-params.max_shift, params.max_shift + 1))
    cx, cy = subject.face_center
    ax, ay = subject.face_axes
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    face = ((xx - cx - dx) / ax) ** 2 + ((yy - cy - dy) / ay) ** 2 <= 1.0
    img = np.full((h, w), params.background)
    img[face] = params.face
    shifted = np.roll(np.roll(subject.vessels, dy, axis=0), dx, axis=1)
    img[(shifted == 1) & face] += params.vessel_contrast
    if sigma > 0:
        img += rng.normal(0.0, sigma, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8), (dx, dy)


def synth_faces(root, n_subjects, n_per_subject, image_size=(128, 128), seed=0,
                params=SynthParams(), noise_sigma=None):
    """Write ``root/<subject>/<image>.pgm`` plus a ``minutiae.csv`` ground-truth sidecar.

    Returns the list of written image paths in generation order.
    """
    if n_subjects < 2:
        raise ValueError("need at least two subjects")
    if n_per_subject < 1:
        raise ValueError("need at least one image per subject")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(seed))
    paths = []
    truth_rows = []
    for s in range(n_subjects):
        name = f"s{s:02d}"
        subject = make_subject(rng, image_size, params)
        (root / name).mkdir(exist_ok=True)
        for i in range(n_per_subject):
            img, (dx, dy) = render(subject, image_size, rng, params, noise_sigma)
            path = root / name / f"{name}_{i:03d}.pgm"
            write_pgm(path, img)
            paths.append(path)
            rel = path.relative_to(root).as_posix()
            for x, y, kind in subject.minutiae:
                truth_rows.append((rel, x + dx, y + dy, kind))
    with open(root / "minutiae.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["image", "x", "y", "kind"])
        wr.writerows(truth_rows)
    return paths
