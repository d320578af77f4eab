"""Forward-only learning: winner-takes-all Hebbian pretraining, cosine
K-means, and a supervised linear head on the learned features.

One training step is one forward pass plus a local update.  With input
vector x and weight matrix W (features x units), unit j responds with

    y_j = sum_i W_ij x_i / sum_i W_ij,

the winner j* = argmax_j y_j strengthens its column,

    W[:,j*] += lr * y * (x - y * W[:,j*]),        y = y_{j*},

and every losing column decays along the same residual direction scaled
by -lr * lambda.  The quadratic self-correction term keeps the winner
bounded (an Oja-style stabilizer), so no per-step renormalization is
needed; only the initialization normalizes columns.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import LabeledDataset
from .errors import (
    DegenerateNormalizationError,
    NumericOverflowError,
    ZeroVectorError,
)
from .mimo import DEGENERACY_RTOL
from .seeding import substream

__all__ = [
    "TrainState",
    "ClusterModel",
    "LinearHead",
    "linear_lr",
    "init_weights",
    "hebbian_response",
    "responses_batch",
    "hebbian_step",
    "pretrain",
    "majority_label_map",
    "assign_labels_by_majority",
    "classify",
    "unsupervised_accuracy",
    "kmeans_assign",
    "kmeans_fit",
    "finetune_head",
    "head_predict",
]

WEIGHT_LIMIT = 1e12  # any |W_ij| beyond this signals a divergent learning rate

DEFAULT_LR_INITIAL = 0.01
DEFAULT_LR_FINAL = 1e-4
DEFAULT_LAMBDA = 0.01


@dataclass(frozen=True)
class TrainState:
    """Hebbian weight matrix plus the hyperparameters that produced it."""

    weights: np.ndarray  # (n_features, m_units)
    lam: float = DEFAULT_LAMBDA
    epoch: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.size == 0:
            raise ValueError("weights must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        object.__setattr__(self, "weights", w)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    @property
    def m_units(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class ClusterModel:
    """Cluster centers stored column-wise, assignment by the named metric."""

    centers: np.ndarray  # (n_features, k)
    assignment_metric: str = "cosine"

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        if c.ndim != 2 or c.size == 0:
            raise ValueError("centers must be a non-empty 2-D matrix")
        if np.any(np.linalg.norm(c, axis=0) == 0.0):
            raise ValueError("no center may be the zero vector")
        if self.assignment_metric not in ("cosine", "euclidean"):
            raise ValueError("assignment_metric must be 'cosine' or 'euclidean'")
        object.__setattr__(self, "centers", c)

    @property
    def k(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class LinearHead:
    """Affine readout trained on top of frozen Hebbian features."""

    weights: np.ndarray  # (m_units, n_classes)
    bias: np.ndarray  # (n_classes,)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[1],):
            raise ValueError("weights must be (m, classes) with matching bias")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("head parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)


def linear_lr(initial: float = DEFAULT_LR_INITIAL, final: float = DEFAULT_LR_FINAL):
    """Learning-rate schedule interpolating linearly over the training run."""

    def schedule(step: int, total: int) -> float:
        if total <= 1:
            return initial
        frac = min(max(step / (total - 1), 0.0), 1.0)
        return initial + (final - initial) * frac

    return schedule


def init_weights(n_features: int, m_units: int, seed: int) -> np.ndarray:
    """Columns drawn uniform in (0, 1), then normalized to sum 1.

    Positive column sums keep the response denominator safe at epoch 0.
    """
    rng = np.random.default_rng(substream(seed, "init"))
    w = rng.uniform(0.0, 1.0, size=(n_features, m_units))
    return w / w.sum(axis=0)


def _check_columns(weights):
    col_sums = weights.sum(axis=0)
    col_mags = np.abs(weights).sum(axis=0)
    bad = (col_mags == 0.0) | (np.abs(col_sums) < DEGENERACY_RTOL * col_mags)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise DegenerateNormalizationError(
            f"weight column {j} has a degenerate sum", column=j
        )
    return col_sums


def hebbian_response(weights, x) -> tuple[np.ndarray, int]:
    """Per-unit decoded responses and the winner (lowest index on ties)."""
    w = np.asarray(weights, dtype=np.float64)
    xv = np.asarray(x, dtype=np.float64)
    if xv.shape != (w.shape[0],):
        raise ValueError("input length does not match the weight rows")
    col_sums = _check_columns(w)
    responses = (xv @ w) / col_sums
    return responses, int(np.argmax(responses))


def responses_batch(weights, X) -> np.ndarray:
    """Row-wise responses for a whole feature matrix."""
    w = np.asarray(weights, dtype=np.float64)
    Xv = np.asarray(X, dtype=np.float64)
    if Xv.ndim != 2 or Xv.shape[1] != w.shape[0]:
        raise ValueError("feature matrix width does not match the weight rows")
    col_sums = _check_columns(w)
    return (Xv @ w) / col_sums


def _step_inplace(W, x, lr, lam, loser_uses_own_response):
    responses, winner = hebbian_response(W, x)
    y_win = responses[winner]
    ys = responses if loser_uses_own_response else np.full_like(responses, y_win)
    ys = ys.copy()
    ys[winner] = y_win
    coef = np.full(W.shape[1], -lr * lam)
    coef[winner] = lr
    W += (coef * ys) * (x[:, None] - ys * W)
    peak = np.abs(W).max()
    if not np.isfinite(peak) or peak > WEIGHT_LIMIT:
        raise NumericOverflowError(
            f"|W| reached {peak:.3e}; reduce the learning rate"
        )
    return winner


def hebbian_step(
    state: TrainState,
    x,
    lr: float,
    loser_uses_own_response: bool = False,
) -> TrainState:
    """One winner-takes-all update; returns a new state.

    ``loser_uses_own_response`` switches the losing columns' residual from
    the winner's response to their own (an alternative reading of the
    decay rule); default is the winner's response everywhere.
    """
    if lr <= 0:
        raise ValueError("lr must be positive")
    xv = np.asarray(x, dtype=np.float64)
    W = state.weights.copy()
    _step_inplace(W, xv, lr, state.lam, loser_uses_own_response)
    return replace(state, weights=W)


def pretrain(
    data: LabeledDataset,
    m_hidden: int,
    epochs: int,
    lr_schedule=None,
    lam: float = DEFAULT_LAMBDA,
    seed: int = 0,
    loser_uses_own_response: bool = False,
) -> TrainState:
    """Shuffled per-sample Hebbian training; bit-deterministic for a seed."""
    if epochs < 1:
        raise ValueError("epochs must be at least 1")
    if m_hidden < 1:
        raise ValueError("m_hidden must be at least 1")
    schedule = lr_schedule if lr_schedule is not None else linear_lr()
    if not callable(schedule):
        value = float(schedule)
        schedule = lambda step, total: value  # noqa: E731  constant rate
    X = data.features
    n_samples = X.shape[0]
    W = init_weights(X.shape[1], m_hidden, seed)
    shuffle_rng = np.random.default_rng(substream(seed, "shuffle"))
    total = epochs * n_samples
    step = 0
    for epoch in range(epochs):
        order = shuffle_rng.permutation(n_samples)
        for i in order:
            lr = schedule(step, total)
            try:
                _step_inplace(W, X[i], lr, lam, loser_uses_own_response)
            except (DegenerateNormalizationError, NumericOverflowError) as err:
                raise type(err)(
                    f"epoch {epoch}, sample {int(i)} (step {step}): {err}"
                ) from err
            step += 1
    return TrainState(weights=W, lam=lam, epoch=epochs, rng_seed=seed)


def majority_label_map(assignments, labels, n_units: int) -> np.ndarray:
    """Map each unit to the majority label among the samples it wins.

    Units that win nothing map to class 0.  This single implementation is
    the evaluation protocol for Hebbian units, autoencoder bottlenecks and
    cluster models alike.
    """
    a = np.asarray(assignments, dtype=np.int64)
    lab = np.asarray(labels, dtype=np.int64)
    if a.shape != lab.shape:
        raise ValueError("assignments and labels must align")
    n_classes = int(lab.max()) + 1 if lab.size else 1
    mapping = np.zeros(n_units, dtype=np.int64)
    for unit in range(n_units):
        mine = lab[a == unit]
        if mine.size:
            mapping[unit] = int(np.argmax(np.bincount(mine, minlength=n_classes)))
    return mapping


def assign_labels_by_majority(state: TrainState, data: LabeledDataset) -> np.ndarray:
    """Unit -> class map from the training winners."""
    if data.labels is None:
        raise ValueError("labelled data required")
    winners = np.argmax(responses_batch(state.weights, data.features), axis=1)
    return majority_label_map(winners, data.labels, state.m_units)


def classify(state: TrainState, unit_to_class, X) -> np.ndarray:
    """Predicted labels: each sample gets its winning unit's class."""
    winners = np.argmax(responses_batch(state.weights, X), axis=1)
    return np.asarray(unit_to_class, dtype=np.int64)[winners]


def unsupervised_accuracy(
    assignments_train,
    labels_train,
    assignments_test,
    labels_test,
    n_units: int,
) -> float:
    """Accuracy under the shared majority-label protocol."""
    mapping = majority_label_map(assignments_train, labels_train, n_units)
    predicted = mapping[np.asarray(assignments_test, dtype=np.int64)]
    return float(np.mean(predicted == np.asarray(labels_test)))


def _unit_rows(X):
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVectorError(
            f"row {int(np.argmax(norms == 0.0))} is the zero vector"
        )
    return X / norms[:, None], norms


def kmeans_assign(model: ClusterModel, x) -> int:
    """Index of the center with the highest cosine similarity to x."""
    if model.assignment_metric != "cosine":
        raise ValueError("kmeans_assign is the cosine rule; model uses euclidean")
    xv = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(xv)
    if norm == 0.0:
        raise ZeroVectorError("cannot assign the zero vector by cosine similarity")
    sims = (xv @ model.centers) / (np.linalg.norm(model.centers, axis=0) * norm)
    return int(np.argmax(sims))


def _cosine_pp_init(unit_x, k, rng):
    """k-means++ style seeding with 1 - cosine similarity as the distance."""
    n = unit_x.shape[0]
    centers = [unit_x[rng.integers(n)]]
    best_sim = unit_x @ centers[0]
    while len(centers) < k:
        d = np.clip(1.0 - best_sim, 0.0, None)
        total = d.sum()
        if total <= 0:
            idx = rng.integers(n)  # all points coincide with a center
        else:
            idx = rng.choice(n, p=d / total)
        centers.append(unit_x[idx])
        best_sim = np.maximum(best_sim, unit_x @ centers[-1])
    return np.stack(centers, axis=1)


def kmeans_fit(
    data: LabeledDataset,
    k: int,
    iters: int = 100,
    seed: int = 0,
) -> ClusterModel:
    """Lloyd-style alternation with cosine assignment.

    Centers update to the normalized sum of their members' unit vectors,
    which exactly maximizes the mean cosine objective for fixed
    assignments, so the objective never decreases.  An empty cluster is
    re-seeded to the sample farthest (least similar) from its stale
    center.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    X = data.features
    if X.shape[0] < k:
        raise ValueError("need at least k samples")
    unit_x, _ = _unit_rows(X)
    rng = np.random.default_rng(substream(seed, "kmeans"))
    centers = _cosine_pp_init(unit_x, k, rng)
    assignments = None
    for _ in range(max(1, iters)):
        sims = unit_x @ centers  # centers are unit columns
        new_assignments = np.argmax(sims, axis=1)
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for j in range(k):
            members = unit_x[assignments == j]
            if members.shape[0] == 0:
                farthest = int(np.argmin(unit_x @ centers[:, j]))
                centers[:, j] = unit_x[farthest]
                continue
            summed = members.sum(axis=0)
            norm = np.linalg.norm(summed)
            if norm == 0.0:
                farthest = int(np.argmin(unit_x @ centers[:, j]))
                centers[:, j] = unit_x[farthest]
            else:
                centers[:, j] = summed / norm
    return ClusterModel(centers=centers, assignment_metric="cosine")


def kmeans_objective(model: ClusterModel, X) -> float:
    """Mean cosine similarity of samples to their assigned centers."""
    unit_x, _ = _unit_rows(np.asarray(X, dtype=np.float64))
    unit_c = model.centers / np.linalg.norm(model.centers, axis=0)
    return float(np.max(unit_x @ unit_c, axis=1).mean())


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def fit_logistic_head(features, labels, l2: float, lr: float, iters: int) -> LinearHead:
    """Multinomial logistic regression by full-batch gradient descent.

    Zero initialization, fixed iteration budget, deterministic.  Features
    are standardized internally and the affine transform is folded back
    into the returned parameters, so prediction consumes raw features.
    The L2 penalty covers weights and bias and is applied as a proximal
    (implicit) decay step, which is stable for any l2 >= 0; the
    infinite-regularization limit therefore collapses every prediction to
    class 0.  Shared between the Hebbian and autoencoder pipelines so
    both sides of the comparison are trained identically.
    """
    H = np.asarray(features, dtype=np.float64)
    lab = np.asarray(labels, dtype=np.int64)
    n, m = H.shape
    c = int(lab.max()) + 1
    mu = H.mean(axis=0)
    sd = H.std(axis=0)
    sd = np.where(sd < 1e-8, 1.0, sd)
    Hs = (H - mu) / sd
    Y = np.zeros((n, c))
    Y[np.arange(n), lab] = 1.0
    V = np.zeros((m, c))
    b = np.zeros(c)
    shrink = 1.0 / (1.0 + lr * l2)
    for _ in range(iters):
        P = _softmax(Hs @ V + b)
        G = (P - Y) / n
        V = (V - lr * (Hs.T @ G)) * shrink
        b = (b - lr * G.sum(axis=0)) * shrink
        if not np.isfinite(V).all():
            raise NumericOverflowError("head training diverged; reduce lr")
    scale = 1.0 / sd
    return LinearHead(weights=V * scale[:, None], bias=b - (mu * scale) @ V)


def finetune_head(
    state: TrainState,
    data: LabeledDataset,
    l2: float = 1e-4,
    lr: float = 1.0,
    iters: int = 500,
) -> LinearHead:
    """Supervised linear head on the frozen Hebbian responses."""
    if data.labels is None:
        raise ValueError("labelled data required")
    H = responses_batch(state.weights, data.features)
    return fit_logistic_head(H, data.labels, l2=l2, lr=lr, iters=iters)


def head_predict(state: TrainState, head: LinearHead, X) -> np.ndarray:
    """Class predictions of the fine-tuned head."""
    H = responses_batch(state.weights, X)
    return np.argmax(H @ head.weights + head.bias, axis=1)
