"""Report figures, rendered off-screen straight to files."""
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .ellipse import draw_points, rasterize_ellipse
from .minutiae import overlay

# no version/date metadata, so identical inputs give identical files
_PNG_META = {"Software": None}


def _new_figure(width, height):
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    fig.savefig(path, format="png", metadata=_PNG_META)


def plot_stages(stages, path, title=None):
    """Grid of the pipeline stages of one image, input through minutiae."""
    boundary = draw_points(stages.gray.shape, rasterize_ellipse(stages.ellipse))
    with_ellipse = np.repeat(stages.gray[..., None], 3, axis=2)
    with_ellipse[boundary == 1] = (255, 255, 0)
    panels = [
        ("grayscale", stages.gray, "gray"),
        ("mean threshold", stages.binary, "gray"),
        ("largest component", stages.face, "gray"),
        ("ellipse", with_ellipse, None),
        ("elliptic crop", stages.cropped, "gray"),
        ("gradient magnitude", stages.gradient.magnitude, "magma"),
        ("perfusion map", stages.ridges, "gray"),
        ("minutiae", overlay(stages.cropped, stages.minutiae, stages.ridges), None),
    ]
    fig = _new_figure(12, 6.5)
    for i, (name, img, cmap) in enumerate(panels):
        ax = fig.add_subplot(2, 4, i + 1)
        ax.imshow(img, cmap=cmap, interpolation="nearest")
        ax.set_title(name, fontsize=10)
        ax.set_axis_off()
    c = stages.center
    fig.axes[2].plot([c.x], [c.y], marker="+", color="red", markersize=10)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def plot_block_rates(report, path):
    """Bar chart of performance rate against block size."""
    fig = _new_figure(5, 3.5)
    ax = fig.add_subplot(1, 1, 1)
    names = [f"{r.block_size}x{r.block_size}" for r in report.results]
    rates = [r.rate for r in report.results]
    bars = ax.bar(names, rates, color="#4477aa")
    for bar, rate in zip(bars, rates):
        ax.text(bar.get_x() + bar.get_width() / 2, rate + 1, f"{rate:.2f}",
                ha="center", va="bottom", fontsize=9)
    ax.set_ylim(0, 110)
    ax.set_xlabel("block size")
    ax.set_ylabel("performance rate (%)")
    fig.tight_layout()
    _save(fig, path)


def plot_confusion(result, classes, path):
    fig = _new_figure(5, 4.5)
    ax = fig.add_subplot(1, 1, 1)
    cm = result.confusion
    im = ax.imshow(cm, cmap="Blues")
    ax.set_xticks(range(len(classes)), labels=classes, rotation=45, fontsize=8)
    ax.set_yticks(range(len(classes)), labels=classes, fontsize=8)
    thresh = cm.max() / 2 if cm.size else 0
    for (i, j), v in np.ndenumerate(cm):
        ax.text(j, i, str(v), ha="center", va="center", fontsize=7,
                color="white" if v > thresh else "black")
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(f"block {result.block_size}: {result.rate:.2f}%")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    _save(fig, path)


def plot_loss(history, path, label=None):
    fig = _new_figure(5, 3.5)
    ax = fig.add_subplot(1, 1, 1)
    ax.semilogy(np.arange(1, len(history) + 1), history, label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    if label:
        ax.legend()
    fig.tight_layout()
    _save(fig, path)
