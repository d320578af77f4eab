"""Shared fixtures: synthetic datasets, the digits surrogate, MNIST gating.

The MNIST table reproductions require the real IDX files (not shipped;
see README).  Everything else runs self-contained: a real-data stand-in
for the 784-feature pipelines is built from sklearn's bundled 8x8 digits
upsampled to 28x28, so the full training stack is exercised on every run
even where MNIST is absent.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from oscnet import data as data_mod

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")


def mnist_paths():
    return data_mod.find_mnist()


requires_mnist = pytest.mark.skipif(
    mnist_paths() is None,
    reason="MNIST IDX files not found (set OSCNET_DATA_DIR; see README)",
)


@pytest.fixture(scope="session")
def digits_surrogate():
    """(train, test) LabeledDatasets: 28x28 upsampled sklearn digits.

    Real handwritten-digit data with the MNIST feature geometry
    (784 features in [0, 1], 10 classes); 1500/297 deterministic split.
    """
    from scipy.ndimage import zoom
    from sklearn.datasets import load_digits

    raw = load_digits()
    big = zoom(raw.images / 16.0, (1, 3.5, 3.5), order=1).clip(0.0, 1.0)
    feats = big.reshape(len(raw.images), -1)
    perm = np.random.default_rng(0).permutation(len(feats))
    train = data_mod.LabeledDataset(feats[perm[:1500]], raw.target[perm[:1500]])
    test = data_mod.LabeledDataset(feats[perm[1500:]], raw.target[perm[1500:]])
    return train, test


@pytest.fixture(scope="session")
def mnist_datasets():
    paths = mnist_paths()
    if paths is None:
        pytest.skip("MNIST IDX files not found (set OSCNET_DATA_DIR; see README)")
    train = data_mod.load_mnist(paths["train_images"], paths["train_labels"])
    test = data_mod.load_mnist(paths["test_images"], paths["test_labels"])
    return train, test


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
