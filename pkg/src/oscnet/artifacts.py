"""Versioned JSON persistence for model artifacts, run manifests, and the
results ledger.

Every artifact carries ``version`` and ``kind`` fields and loading fails
loudly on anything unknown.  Floats are serialized via ``repr`` (which
json uses natively), so save/load round-trips are bit-exact.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import AutoencoderModel
from .errors import UnknownVersionError
from .hebbian import ClusterModel, LinearHead, TrainState
from .mimo import MimoNetwork
from .retina import RetinaWorld

__all__ = [
    "RunManifest",
    "save_train_state",
    "load_train_state",
    "save_linear_head",
    "load_linear_head",
    "save_cluster_model",
    "load_cluster_model",
    "save_autoencoder",
    "load_autoencoder",
    "save_world",
    "load_world",
    "save_network",
    "load_network",
    "save_json",
    "load_json",
    "append_result",
]

FORMAT_VERSION = 1


def save_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def _check_header(payload: dict, kind: str) -> None:
    if payload.get("version") != FORMAT_VERSION:
        raise UnknownVersionError(
            f"expected version {FORMAT_VERSION}, got {payload.get('version')!r}"
        )
    if payload.get("kind") != kind:
        raise UnknownVersionError(
            f"expected a {kind!r} artifact, got {payload.get('kind')!r}"
        )


def _matrix(rows_cols, flat) -> np.ndarray:
    n, m = rows_cols
    return np.asarray(flat, dtype=np.float64).reshape(n, m)


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written next to every primary artifact."""

    seed: int
    hyperparameters: dict
    dataset_checksum: str
    module_versions: dict = field(default_factory=dict)
    timestamp: str = ""

    @classmethod
    def create(cls, seed: int, hyperparameters: dict, dataset_checksum: str) -> "RunManifest":
        return cls(
            seed=int(seed),
            hyperparameters=dict(hyperparameters),
            dataset_checksum=dataset_checksum,
            module_versions={"oscnet": __version__, "numpy": np.__version__},
            timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        )

    def save(self, path) -> None:
        payload = {"version": FORMAT_VERSION, "kind": "run-manifest", **asdict(self)}
        save_json(path, payload)


def save_train_state(path, state: TrainState) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "kind": "train-state",
        "n": state.n_features,
        "m": state.m_units,
        "lambda": state.lam,
        "seed": state.rng_seed,
        "epoch": state.epoch,
        "weights": state.weights.ravel().tolist(),  # row-major
    }
    save_json(path, payload)


def load_train_state(path) -> TrainState:
    payload = load_json(path)
    _check_header(payload, "train-state")
    return TrainState(
        weights=_matrix((payload["n"], payload["m"]), payload["weights"]),
        lam=float(payload["lambda"]),
        epoch=int(payload["epoch"]),
        rng_seed=int(payload["seed"]),
    )


def save_linear_head(path, head: LinearHead) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "kind": "linear-head",
        "m": head.weights.shape[0],
        "classes": head.weights.shape[1],
        "weights": head.weights.ravel().tolist(),
        "bias": head.bias.tolist(),
    }
    save_json(path, payload)


def load_linear_head(path) -> LinearHead:
    payload = load_json(path)
    _check_header(payload, "linear-head")
    return LinearHead(
        weights=_matrix((payload["m"], payload["classes"]), payload["weights"]),
        bias=np.asarray(payload["bias"], dtype=np.float64),
    )


def save_cluster_model(path, model: ClusterModel) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "kind": "cluster-model",
        "dim": model.centers.shape[0],
        "k": model.k,
        "metric": model.assignment_metric,
        "centers": model.centers.ravel().tolist(),
    }
    save_json(path, payload)


def load_cluster_model(path) -> ClusterModel:
    payload = load_json(path)
    _check_header(payload, "cluster-model")
    return ClusterModel(
        centers=_matrix((payload["dim"], payload["k"]), payload["centers"]),
        assignment_metric=payload["metric"],
    )


def save_autoencoder(path, model: AutoencoderModel) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "kind": "autoencoder",
        "dims": list(model.dims),
        "weights": [w.ravel().tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }
    save_json(path, payload)


def load_autoencoder(path) -> AutoencoderModel:
    payload = load_json(path)
    _check_header(payload, "autoencoder")
    dims = [int(d) for d in payload["dims"]]
    weights = tuple(
        _matrix((dims[l], dims[l + 1]), flat)
        for l, flat in enumerate(payload["weights"])
    )
    biases = tuple(np.asarray(b, dtype=np.float64) for b in payload["biases"])
    return AutoencoderModel(dims=tuple(dims), weights=weights, biases=biases)


def save_world(path, world: RetinaWorld) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "kind": "retina-world",
        "grid": list(world.grid),
        "n_cells": world.n_cells,
        "positions": world.positions.ravel().tolist(),
        "transmission": world.transmission.ravel().tolist(),
        "lgn_weights": world.lgn_weights.ravel().tolist(),
    }
    save_json(path, payload)


def load_world(path) -> RetinaWorld:
    payload = load_json(path)
    _check_header(payload, "retina-world")
    grid = tuple(int(v) for v in payload["grid"])
    n_cells = int(payload["n_cells"])
    n_pixels = grid[0] * grid[1]
    return RetinaWorld(
        grid=grid,
        positions=_matrix((n_cells, 2), payload["positions"]),
        transmission=_matrix((n_cells, n_pixels), payload["transmission"]),
        lgn_weights=_matrix((n_cells, n_pixels), payload["lgn_weights"]),
    )


def save_network(path, net: MimoNetwork) -> None:
    payload = {
        "version": FORMAT_VERSION,
        "kind": "mimo-network",
        "n_inputs": net.n_inputs,
        "n_outputs": net.n_outputs,
        "weights": net.weights.ravel().tolist(),  # row-major
    }
    save_json(path, payload)


def load_network(path) -> MimoNetwork:
    """Reads the canonical on-disk shape {n_inputs, n_outputs, weights}.

    The version header is optional here so hand-written experiment specs
    stay terse; when present it is validated.
    """
    payload = load_json(path)
    if "version" in payload:
        _check_header(payload, "mimo-network")
    return MimoNetwork(
        weights=_matrix((payload["n_inputs"], payload["n_outputs"]), payload["weights"])
    )


def append_result(path, record: dict) -> None:
    """Append one JSON object to the run ledger (one line per run)."""
    with open(path, "a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
