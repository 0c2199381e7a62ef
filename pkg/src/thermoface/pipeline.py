"""End-to-end orchestration: ingest, feature extraction, training, evaluation."""
import csv
import logging
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import mlp
from .ellipse import crop_ellipse, estimate_axes
from .errors import (EmptyDataset, MixedSizes, NoSubjects, NonFinite, StageError,
                     ThermofaceError, TrainingDiverged, UnreadableImage)
from .minutiae import block_features, extract_minutiae
from .perfusion import binarize_gradient, sobel, thin
from .raster import binarize_mean, ensure_gray, read_pnm
from .segmentation import centroid, label_components, largest_component

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".pgm", ".ppm")


@dataclass
class PipelineConfig:
    connectivity: int = 8
    scale_major: float = 1.0
    scale_minor: float = 1.0
    norm: str = "L2"
    threshold: str = "mean"  # "mean" or a percentile such as "90"
    thinning: bool = True
    block_size: int = 8
    block_sizes: tuple = (8, 16, 32)
    hidden: tuple = mlp.DEFAULT_HIDDEN
    learning_rate: float = 0.01
    momentum: float = 0.9
    epochs: int = 500
    split_ratio: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        if self.norm not in ("L2", "L1"):
            raise ValueError("norm must be L2 or L1")
        if self.threshold != "mean":
            float(self.threshold)
        if not 0 < self.split_ratio < 1:
            raise ValueError("split_ratio must lie in (0, 1)")
        if self.scale_major <= 0 or self.scale_minor <= 0:
            raise ValueError("ellipse scales must be positive")
        self.block_sizes = tuple(int(b) for b in self.block_sizes)
        self.hidden = tuple(int(d) for d in self.hidden)

    def train_config(self):
        return mlp.TrainConfig(learning_rate=self.learning_rate, momentum=self.momentum,
                               epochs=self.epochs)

    def threshold_value(self):
        return "mean" if self.threshold == "mean" else float(self.threshold)


def _parse_value(current, text):
    if isinstance(current, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if isinstance(current, tuple):
        return tuple(int(t) for t in text.replace(",", " ").split())
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    return text


def config_from_mapping(values, base=None):
    """Build a config from string values, e.g. parsed from a key=value file."""
    base = base or PipelineConfig()
    known = {f.name for f in fields(PipelineConfig)}
    kwargs = {f.name: getattr(base, f.name) for f in fields(PipelineConfig)}
    for key, text in values.items():
        key = key.strip().replace("-", "_")
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[key] = _parse_value(kwargs[key], str(text).strip())
    return PipelineConfig(**kwargs)


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


# --- per-image pipeline ------------------------------------------------------------

@dataclass
class Stages:
    """Every intermediate product of one pipeline run, for reports and debugging."""

    gray: np.ndarray = None
    binary: np.ndarray = None
    labels: object = None
    face: np.ndarray = None
    center: object = None
    ellipse: object = None
    cropped: np.ndarray = None
    gradient: object = None
    perfusion: np.ndarray = None
    ridges: np.ndarray = None
    minutiae: list = field(default_factory=list)


class _stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, ThermofaceError) and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def extract_stages(img, cfg=None):
    """Run every stage up to minutiae extraction and keep the intermediates."""
    cfg = cfg or PipelineConfig()
    st = Stages()
    with _stage("grayscale"):
        st.gray = ensure_gray(img)
    with _stage("binarize"):
        st.binary = binarize_mean(st.gray)
    with _stage("segmentation"):
        st.labels = label_components(st.binary, cfg.connectivity)
        st.face = largest_component(st.labels)
    with _stage("centroid"):
        st.center = centroid(st.face)
    with _stage("ellipse"):
        st.ellipse = estimate_axes(st.face, st.center, cfg.scale_major, cfg.scale_minor)
    with _stage("crop"):
        st.cropped = crop_ellipse(st.gray, st.ellipse)
    with _stage("sobel"):
        st.gradient = sobel(st.cropped, cfg.norm)
    with _stage("perfusion"):
        st.perfusion = binarize_gradient(st.gradient, cfg.threshold_value())
    with _stage("thinning"):
        st.ridges = thin(st.perfusion) if cfg.thinning else st.perfusion
    with _stage("minutiae"):
        st.minutiae = extract_minutiae(st.ridges)
    return st


def run_pipeline(img, cfg=None, block_size=None):
    """Image to block-count feature vector, through every stage in order."""
    cfg = cfg or PipelineConfig()
    st = extract_stages(img, cfg)
    h, w = st.gray.shape
    with _stage("features"):
        return block_features(st.minutiae, w, h, block_size or cfg.block_size)


# --- datasets --------------------------------------------------------------------

@dataclass
class ManifestEntry:
    path: Path
    subject: str
    split: str


@dataclass
class DatasetManifest:
    root: Path
    entries: list
    image_size: tuple  # (width, height)

    @property
    def subjects(self):
        return sorted({e.subject for e in self.entries})

    def split(self, name):
        return [e for e in self.entries if e.split == name]


def _image_size(path):
    img = read_pnm(path)
    return img.shape[1], img.shape[0]


def ingest(root, split_ratio=0.5, seed=0):
    """Scan ``root/<subject>/<image>.pgm|ppm`` and split each subject's images.

    Within a subject the sorted file list is shuffled with a generator seeded
    by ``seed`` and the first ``round(split_ratio * n)`` images form the
    training split.
    """
    root = Path(root)
    if not root.is_dir():
        raise NoSubjects(f"{root} is not a directory")
    subjects = {}
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        images = sorted(p for p in sub.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
        if images:
            subjects[sub.name] = images
    if not subjects:
        raise NoSubjects(f"no subject directories with images under {root}")

    size = None
    for images in subjects.values():
        for path in images:
            s = _image_size(path)
            if size is None:
                size = s
            elif s != size:
                raise MixedSizes(path, s, size)

    rng = np.random.Generator(np.random.PCG64(seed))
    entries = []
    for name, images in subjects.items():
        order = rng.permutation(len(images))
        n_train = int(np.floor(split_ratio * len(images) + 0.5))
        train_idx = set(order[:n_train].tolist())
        for i, path in enumerate(images):
            entries.append(ManifestEntry(path, name, "train" if i in train_idx else "test"))
    return DatasetManifest(root, entries, size)


def write_manifest(path, manifest):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["path", "subject", "split"])
        for e in manifest.entries:
            wr.writerow([Path(e.path).relative_to(manifest.root).as_posix(), e.subject, e.split])


def read_manifest(path, root=None):
    path = Path(path)
    root = Path(root) if root else path.parent
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    entries = [ManifestEntry(root / r["path"], r["subject"], r["split"]) for r in rows]
    size = _image_size(entries[0].path) if entries else None
    return DatasetManifest(root, entries, size)


# --- evaluation -------------------------------------------------------------------

@dataclass
class ExtractedSet:
    """Minutiae of every usable image, plus the ones that failed."""

    entries: list
    minutiae: list
    image_size: tuple
    failures: list  # (path, StageError)

    def features(self, block_size):
        w, h = self.image_size
        return np.array([block_features(ms, w, h, block_size).counts for ms in self.minutiae],
                        dtype=np.float64)


def extract_dataset(entries, cfg, image_size=None):
    """Run the image stages on every entry, skipping and logging stage failures."""
    kept, found, failures = [], [], []
    for e in entries:
        try:
            img = read_pnm(e.path)
            if image_size is not None and (img.shape[1], img.shape[0]) != tuple(image_size):
                raise MixedSizes(e.path, (img.shape[1], img.shape[0]), image_size)
            st = extract_stages(img, cfg)
        except (StageError, UnreadableImage, MixedSizes) as exc:
            log.warning("skipping %s: %s", e.path, exc)
            failures.append((e.path, exc))
            continue
        image_size = image_size or (st.gray.shape[1], st.gray.shape[0])
        kept.append(e)
        found.append(st.minutiae)
    return ExtractedSet(kept, found, image_size, failures)


@dataclass
class BlockResult:
    block_size: int
    rate: float  # percent
    correct: int
    total: int
    confusion: np.ndarray  # rows = true class, columns = predicted
    per_class: list  # accuracy per class, percent; nan when a class has no test images
    model: object = None


@dataclass
class EvalReport:
    classes: list
    results: list  # BlockResult per block size
    n_train: int
    n_test: int
    failures: list
    timings: dict = field(default_factory=dict)

    def result(self, block_size):
        for r in self.results:
            if r.block_size == block_size:
                return r
        raise KeyError(block_size)


def _confusion(y_true, y_pred, n):
    cm = np.zeros((n, n), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        cm[t, p] += 1
    return cm


def fit_and_score(X_train, y_train, X_test, y_test, n_classes, cfg, block_size):
    model = mlp.new_network([X_train.shape[1], *cfg.hidden, n_classes], cfg.seed)
    try:
        model = mlp.train(model, X_train, y_train, cfg.train_config())
    except NonFinite as exc:
        raise TrainingDiverged(f"block size {block_size}: {exc}") from exc
    pred = mlp.predict(model, X_test)
    cm = _confusion(y_test, pred, n_classes)
    correct = int(np.trace(cm))
    total = int(cm.sum())
    row = cm.sum(axis=1)
    per_class = [100.0 * cm[k, k] / row[k] if row[k] else float("nan") for k in range(n_classes)]
    return BlockResult(block_size, 100.0 * correct / total, correct, total, cm, per_class, model)


def evaluate(manifest, cfg=None, block_sizes=None):
    """Train on the train split and score the test split for each block size."""
    cfg = cfg or PipelineConfig()
    block_sizes = tuple(block_sizes or cfg.block_sizes)
    classes = manifest.subjects
    if len(classes) < 2:
        raise NoSubjects("evaluation needs at least two subjects")
    index = {c: k for k, c in enumerate(classes)}
    timings = {}

    t0 = time.perf_counter()
    train = extract_dataset(manifest.split("train"), cfg, manifest.image_size)
    test = extract_dataset(manifest.split("test"), cfg, manifest.image_size)
    timings["extract_s"] = time.perf_counter() - t0
    if not train.entries or not test.entries:
        raise EmptyDataset("both splits need at least one usable image")
    y_train = np.array([index[e.subject] for e in train.entries])
    y_test = np.array([index[e.subject] for e in test.entries])

    results = []
    for bs in block_sizes:
        t0 = time.perf_counter()
        results.append(fit_and_score(train.features(bs), y_train, test.features(bs), y_test,
                                     len(classes), cfg, bs))
        timings[f"train_{bs}_s"] = time.perf_counter() - t0
    return EvalReport(classes, results, len(train.entries), len(test.entries),
                      train.failures + test.failures, timings)


def format_report(report):
    """Aligned text table: one rate per block size, then per-class accuracy."""
    lines = ["Block size    Performance rate (%)    Correct / Total"]
    for r in report.results:
        size = f"{r.block_size}x{r.block_size}"
        lines.append(f"{size:<14}{r.rate:>20.2f}    {r.correct:>7d} / {r.total}")
    lines.append("")
    lines.append(f"train images: {report.n_train}   test images: {report.n_test}   "
                 f"skipped: {len(report.failures)}")
    for path, exc in report.failures:
        lines.append(f"  skipped {path}: {exc}")
    lines.append("")
    header = "class".ljust(12) + "".join(f"{r.block_size:>10d}" for r in report.results)
    lines.append("Per-class accuracy (%) by block size")
    lines.append(header)
    for k, name in enumerate(report.classes):
        cells = "".join(f"{r.per_class[k]:>10.2f}" for r in report.results)
        lines.append(name.ljust(12) + cells)
    for r in report.results:
        lines.append("")
        lines.append(f"Confusion matrix, block {r.block_size} (rows true, columns predicted)")
        for k, name in enumerate(report.classes):
            lines.append(name.ljust(12) + " ".join(f"{v:>4d}" for v in r.confusion[k]))
    return "\n".join(lines) + "\n"


def write_report_csv(path, report):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["block_size", "rate_percent", "correct", "total"]
                    + [f"acc_{c}" for c in report.classes])
        for r in report.results:
            wr.writerow([r.block_size, f"{r.rate:.4f}", r.correct, r.total]
                        + [f"{v:.4f}" for v in r.per_class])


def write_confusion_csv(path, result, classes):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["true\\predicted"] + list(classes))
        for name, row in zip(classes, result.confusion):
            wr.writerow([name] + [int(v) for v in row])


def dump_stages(stages, outdir, figure=True):
    """Write every intermediate of one image (PGM/PPM/CSV, plus a PNG panel)."""
    from .ellipse import draw_points, rasterize_ellipse
    from .minutiae import overlay, write_minutiae_csv
    from .perfusion import gradient_rows
    from .raster import write_binary_pgm, write_pgm, write_ppm
    from .segmentation import labels_to_pgm_array

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_pgm(outdir / "gray.pgm", stages.gray)
    write_binary_pgm(outdir / "binary.pgm", stages.binary)
    write_pgm(outdir / "labels.pgm", labels_to_pgm_array(stages.labels))
    write_binary_pgm(outdir / "face.pgm", stages.face)
    write_binary_pgm(outdir / "ellipse.pgm",
                     draw_points(stages.gray.shape, rasterize_ellipse(stages.ellipse)))
    write_pgm(outdir / "cropped.pgm", stages.cropped)
    write_binary_pgm(outdir / "perfusion.pgm", stages.perfusion)
    write_binary_pgm(outdir / "ridges.pgm", stages.ridges)
    write_minutiae_csv(outdir / "minutiae.csv", stages.minutiae)
    write_ppm(outdir / "overlay.ppm", overlay(stages.cropped, stages.minutiae, stages.ridges))
    with open(outdir / "gradient.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y", "px", "py", "magnitude", "orientation"])
        for x, y, px, py, mag, theta in gradient_rows(stages.gradient):
            wr.writerow([x, y, px, py, repr(mag), repr(theta)])
    if figure:
        from .plotting import plot_stages
        plot_stages(stages, outdir / "stages.png")
