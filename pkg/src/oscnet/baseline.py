"""Backprop baselines: a from-scratch MLP autoencoder and Euclidean K-means.

These exist to be compared against the forward-only pipeline under the
identical majority-label evaluation protocol (one implementation, shared
with :mod:`oscnet.hebbian`).  The autoencoder is a plain ReLU MLP with a
linear output trained by minibatch SGD on mean squared reconstruction
error; its bottleneck activations play the role the Hebbian responses
play on the other side of the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import EmptyClusterError, NumericOverflowError
from .hebbian import ClusterModel
from .seeding import substream

__all__ = [
    "AutoencoderModel",
    "init_autoencoder",
    "ae_forward",
    "ae_gradients",
    "ae_reconstruction_mse",
    "train_autoencoder",
    "bottleneck_assignments",
    "euclidean_kmeans",
    "euclidean_assignments",
    "kmeans_inertia",
]

PARAM_LIMIT = 1e12


@dataclass(frozen=True)
class AutoencoderModel:
    """Symmetric encoder/decoder MLP; ReLU hiddens, linear output."""

    dims: tuple
    weights: tuple  # weights[l] has shape (dims[l], dims[l+1])
    biases: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 3 or len(dims) % 2 == 0:
            raise ValueError("dims must be an odd-length chain like [N, M, N]")
        if dims != dims[::-1]:
            raise ValueError("encoder and decoder dims must mirror each other")
        if any(d < 1 for d in dims):
            raise ValueError("all layer widths must be positive")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[l], dims[l + 1]) or b.shape != (dims[l + 1],):
                raise ValueError(f"layer {l} parameter shapes do not match dims")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError("parameters must be finite")
        object.__setattr__(self, "dims", dims)

    @property
    def bottleneck_layer(self) -> int:
        return len(self.dims) // 2

    def encode(self, X) -> np.ndarray:
        """Activations of the bottleneck layer."""
        return ae_forward(self, X)[self.bottleneck_layer]

    def reconstruct(self, X) -> np.ndarray:
        return ae_forward(self, X)[-1]


def init_autoencoder(dims, seed: int, init_scale: float = 0.3) -> AutoencoderModel:
    """Scaled-He Gaussian weights, zero biases, zero final layer, seeded.

    The damped gain and the zero-initialized output layer keep plain SGD
    on wide positive-valued inputs from either blowing up or killing the
    ReLU units before any reconstruction signal appears (with the output
    layer at zero, the first gradients carry signal instead of init
    noise).
    """
    rng = np.random.default_rng(substream(seed, "ae-init"))
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(
            rng.normal(0.0, init_scale * np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        )
        biases.append(np.zeros(fan_out))
    weights[-1][:] = 0.0
    return AutoencoderModel(dims=tuple(dims), weights=tuple(weights), biases=tuple(biases))


def ae_forward(model: AutoencoderModel, X) -> list:
    """All layer activations, input first, reconstruction last."""
    a = np.asarray(X, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    acts = [a]
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w + b
        acts.append(z if l == last else np.maximum(z, 0.0))
    return acts


def ae_reconstruction_mse(model: AutoencoderModel, X) -> float:
    """Mean squared reconstruction error per element (human-scale metric)."""
    Xv = np.asarray(X, dtype=np.float64)
    if Xv.ndim == 1:
        Xv = Xv[None, :]
    diff = ae_forward(model, Xv)[-1] - Xv
    return float(np.mean(diff * diff))


def ae_gradients(model: AutoencoderModel, X) -> tuple[list, list, float]:
    """Backprop gradients of the training loss on a batch.

    The training loss is the batch mean of the per-sample squared error
    summed over features (so the default learning rate is usable at any
    input width); ae_reconstruction_mse reports the same quantity divided
    by the feature count.
    """
    Xv = np.asarray(X, dtype=np.float64)
    if Xv.ndim == 1:
        Xv = Xv[None, :]
    acts = ae_forward(model, Xv)
    batch, _ = Xv.shape
    diff = acts[-1] - Xv
    loss = float(np.sum(diff * diff) / batch)
    delta = 2.0 * diff / batch
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    for l in range(len(model.weights) - 1, -1, -1):
        grads_w[l] = acts[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * (acts[l] > 0.0)
    return grads_w, grads_b, loss


def train_autoencoder(
    data: LabeledDataset,
    dims,
    epochs: int = 20,
    lr: float = 0.002,
    batch_size: int = 64,
    seed: int = 0,
) -> AutoencoderModel:
    """Minibatch SGD, seeded shuffles, deterministic for a fixed seed."""
    if epochs < 0:
        raise ValueError("epochs must be non-negative")
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    model = init_autoencoder(dims, seed)
    if data.n_features != model.dims[0]:
        raise ValueError("first layer width must match the data features")
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    work = AutoencoderModel(dims=model.dims, weights=tuple(weights), biases=tuple(biases))
    rng = np.random.default_rng(substream(seed, "ae-shuffle"))
    X = data.features
    n = X.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = X[order[start : start + batch_size]]
            grads_w, grads_b, _ = ae_gradients(work, batch)
            for w, b, gw, gb in zip(weights, biases, grads_w, grads_b):
                w -= lr * gw
                b -= lr * gb
            peak = max(float(np.abs(w).max()) for w in weights)
            if not np.isfinite(peak) or peak > PARAM_LIMIT:
                raise NumericOverflowError(
                    f"autoencoder diverged (|W| = {peak:.3e}); reduce lr"
                )
    return work


def bottleneck_assignments(model: AutoencoderModel, X) -> np.ndarray:
    """Unit with the largest bottleneck activation per sample.

    The autoencoder-side analogue of the Hebbian winner, feeding the same
    majority-label protocol.
    """
    return np.argmax(model.encode(X), axis=1)


def _pp_init(X, k, rng):
    """Classic k-means++ seeding with squared Euclidean distances."""
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    while len(centers) < k:
        total = d2.sum()
        idx = rng.integers(n) if total <= 0 else rng.choice(n, p=d2 / total)
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - centers[-1]) ** 2, axis=1))
    return np.stack(centers, axis=0)


def euclidean_assignments(centers_rows, X) -> np.ndarray:
    """Index of the nearest center (squared Euclidean) per row of X."""
    x2 = np.sum(X * X, axis=1, keepdims=True)
    c2 = np.sum(centers_rows * centers_rows, axis=1)
    d2 = x2 - 2.0 * (X @ centers_rows.T) + c2
    return np.argmin(d2, axis=1)


def euclidean_kmeans(
    data: LabeledDataset,
    k: int,
    iters: int = 100,
    seed: int = 0,
) -> ClusterModel:
    """Lloyd's algorithm with k-means++ seeding.

    Empty clusters are re-seeded to the sample farthest from their stale
    center, mirroring the cosine variant's repair rule.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    X = data.features
    if X.shape[0] < k:
        raise ValueError("need at least k samples")
    rng = np.random.default_rng(substream(seed, "euclidean-kmeans"))
    centers = _pp_init(X, k, rng)
    assignments = None
    for _ in range(max(1, iters)):
        new_assignments = euclidean_assignments(centers, X)
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for j in range(k):
            members = X[assignments == j]
            if members.shape[0] == 0:
                d2 = np.sum((X - centers[j]) ** 2, axis=1)
                far = int(np.argmax(d2))
                if d2[far] == 0.0:
                    raise EmptyClusterError(
                        f"cluster {j} is empty and all samples coincide with it"
                    )
                centers[j] = X[far]
            else:
                centers[j] = members.mean(axis=0)
    return ClusterModel(centers=centers.T, assignment_metric="euclidean")


def kmeans_inertia(model: ClusterModel, X) -> float:
    """Sum of squared distances to the assigned centers."""
    centers_rows = model.centers.T
    assign = euclidean_assignments(centers_rows, X)
    diff = X - centers_rows[assign]
    return float(np.sum(diff * diff))
