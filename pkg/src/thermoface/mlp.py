"""Feed-forward tanh network trained by full-batch gradient descent with momentum.

Samples are passed as a feature matrix ``X`` of shape ``(N, d_in)`` and an
integer label vector ``y`` of shape ``(N,)``.
"""
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDims, DimMismatch, EmptyDataset, FormatError, NonFinite

DEFAULT_HIDDEN = (100, 50, 10)
MAGIC = b"MLP1"


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    epochs: int = 500
    full_batch: bool = True
    target_hi: float = 0.9
    target_lo: float = -0.9

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if not self.full_batch:
            raise ValueError("only full-batch training is supported")


@dataclass
class MlpModel:
    layer_dims: list
    weights: list  # weights[k] has shape (layer_dims[k+1], layer_dims[k])
    biases: list
    seed: int = 0
    loss_history: list = field(default_factory=list, compare=False, repr=False)

    @property
    def d_in(self):
        return self.layer_dims[0]

    @property
    def d_out(self):
        return self.layer_dims[-1]

    def n_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self):
        return MlpModel(list(self.layer_dims), [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases], self.seed, list(self.loss_history))


def default_dims(d_in, n_classes):
    return [d_in, *DEFAULT_HIDDEN, n_classes]


def new_network(layer_dims, seed=0):
    """Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from PCG64(seed); zero biases."""
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise BadDims(f"need at least two layers of width >= 1, got {list(layer_dims)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(dims, weights, biases, int(seed))


def _as_batch(m, X):
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != m.d_in:
        raise DimMismatch(f"input width {X.shape[-1]} does not match network input {m.d_in}")
    return X, single


def _activations(m, X):
    acts = [X]
    a = X
    for W, b in zip(m.weights, m.biases):
        a = np.tanh(a @ W.T + b)
        acts.append(a)
    return acts


def forward(m, x):
    """Network output for one sample ``(d_in,)`` or a batch ``(N, d_in)``."""
    X, single = _as_batch(m, x)
    out = _activations(m, X)[-1]
    return out[0] if single else out


def targets(y, n_classes, hi=0.9, lo=-0.9):
    y = np.asarray(y, dtype=np.int64)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise DimMismatch(f"labels must lie in [0, {n_classes})")
    T = np.full((y.size, n_classes), lo, dtype=np.float64)
    T[np.arange(y.size), y] = hi
    return T


def _check_data(m, X, y):
    X, _ = _as_batch(m, X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyDataset("no samples")
    if y.shape != (X.shape[0],):
        raise DimMismatch(f"{X.shape[0]} samples but {y.size} labels")
    return X, y


def loss(m, X, y, cfg=None):
    """Mean over samples of 0.5 * ||forward(x) - t||^2 against +-0.9 one-hot targets."""
    cfg = cfg or TrainConfig()
    X, y = _check_data(m, X, y)
    T = targets(y, m.d_out, cfg.target_hi, cfg.target_lo)
    diff = forward(m, X) - T
    return 0.5 * float(np.sum(diff * diff)) / X.shape[0]


def gradients(m, X, y, cfg=None):
    """Loss and its gradient by backpropagation; returns ``(loss, dW, db)``."""
    cfg = cfg or TrainConfig()
    X, y = _check_data(m, X, y)
    n = X.shape[0]
    T = targets(y, m.d_out, cfg.target_hi, cfg.target_lo)
    acts = _activations(m, X)
    diff = acts[-1] - T
    value = 0.5 * float(np.sum(diff * diff)) / n
    delta = diff * (1.0 - acts[-1] ** 2) / n
    dW = [None] * len(m.weights)
    db = [None] * len(m.weights)
    for k in range(len(m.weights) - 1, -1, -1):
        dW[k] = delta.T @ acts[k]
        db[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ m.weights[k]) * (1.0 - acts[k] ** 2)
    return value, dW, db


def _finite(value, dW, db):
    return (np.isfinite(value) and all(np.isfinite(g).all() for g in dW)
            and all(np.isfinite(g).all() for g in db))


def train(m, X, y, cfg=None):
    """Full-batch gradient descent with momentum on a copy of ``m``.

    Per epoch: ``v <- momentum * v - learning_rate * g`` then ``p <- p + v``,
    with velocities starting at zero. Raises ``NonFinite`` with the epoch index
    if the loss or a gradient stops being finite.
    """
    cfg = cfg or TrainConfig()
    m = m.copy()
    m.loss_history = []
    vW = [np.zeros_like(w) for w in m.weights]
    vb = [np.zeros_like(b) for b in m.biases]
    for epoch in range(cfg.epochs):
        value, dW, db = gradients(m, X, y, cfg)
        if not _finite(value, dW, db):
            raise NonFinite(epoch)
        m.loss_history.append(value)
        for k in range(len(m.weights)):
            vW[k] = cfg.momentum * vW[k] - cfg.learning_rate * dW[k]
            vb[k] = cfg.momentum * vb[k] - cfg.learning_rate * db[k]
            m.weights[k] = m.weights[k] + vW[k]
            m.biases[k] = m.biases[k] + vb[k]
    return m


def gradient_descent(m, X, y, learning_rate, epochs, cfg=None):
    """Plain full-batch gradient descent, ``p <- p - learning_rate * g``."""
    cfg = cfg or TrainConfig()
    m = m.copy()
    m.loss_history = []
    for epoch in range(epochs):
        value, dW, db = gradients(m, X, y, cfg)
        if not _finite(value, dW, db):
            raise NonFinite(epoch)
        m.loss_history.append(value)
        m.weights = [w - learning_rate * g for w, g in zip(m.weights, dW)]
        m.biases = [b - learning_rate * g for b, g in zip(m.biases, db)]
    return m


def predict(m, x):
    """Index of the largest output; ties resolve to the lowest index."""
    out = forward(m, x)
    return np.argmax(out, axis=-1) if out.ndim == 2 else int(np.argmax(out))


def accuracy(m, X, y):
    y = np.asarray(y)
    if y.size == 0:
        raise EmptyDataset("no samples")
    return float(np.mean(predict(m, X) == y))


# --- serialization ------------------------------------------------------------

def to_bytes(m):
    parts = [MAGIC, struct.pack("<I", len(m.layer_dims)),
             struct.pack(f"<{len(m.layer_dims)}I", *m.layer_dims)]
    for W, b in zip(m.weights, m.biases):
        parts.append(np.ascontiguousarray(W, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    parts.append(struct.pack("<Q", m.seed & 0xFFFFFFFFFFFFFFFF))
    return b"".join(parts)


def from_bytes(data):
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError("not an MLP1 model file (bad magic)")
    (n_layers,) = struct.unpack_from("<I", data, 4)
    off = 8
    if n_layers < 2 or len(data) < off + 4 * n_layers:
        raise FormatError("truncated or corrupt layer table")
    dims = list(struct.unpack_from(f"<{n_layers}I", data, off))
    off += 4 * n_layers
    if any(d < 1 for d in dims):
        raise FormatError(f"invalid layer dims {dims}")
    expected = off + 8 * sum(o * i + o for i, o in zip(dims[:-1], dims[1:])) + 8
    if len(data) != expected:
        raise FormatError(f"model file has {len(data)} bytes, expected {expected}")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        W = np.frombuffer(data, dtype="<f8", count=fan_out * fan_in, offset=off)
        off += 8 * fan_out * fan_in
        b = np.frombuffer(data, dtype="<f8", count=fan_out, offset=off)
        off += 8 * fan_out
        weights.append(W.reshape(fan_out, fan_in).astype(np.float64))
        biases.append(b.astype(np.float64))
    (seed,) = struct.unpack_from("<Q", data, off)
    return MlpModel(dims, weights, biases, int(seed))


def save_model(m, path):
    with open(path, "wb") as fh:
        fh.write(to_bytes(m))


def load_model(path):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
