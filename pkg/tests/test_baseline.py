"""Autoencoder baseline and Euclidean K-means tests."""

import numpy as np
import pytest

from oscnet import baseline
from oscnet import data as data_mod
from oscnet.errors import EmptyClusterError


def finite_difference_probe(model, X, n_params=10, eps=1e-6, seed=0):
    """Central differences on randomly chosen parameters.

    Returns (analytic, numeric) pairs; independent of the backprop code
    path except for the shared loss evaluation.
    """
    rng = np.random.default_rng(seed)
    grads_w, grads_b, _ = baseline.ae_gradients(model, X)
    pairs = []
    for _ in range(n_params):
        layer = int(rng.integers(len(model.weights)))
        w = model.weights[layer]
        i, j = int(rng.integers(w.shape[0])), int(rng.integers(w.shape[1]))
        plus = [a.copy() for a in model.weights]
        minus = [a.copy() for a in model.weights]
        plus[layer][i, j] += eps
        minus[layer][i, j] -= eps
        up = baseline.AutoencoderModel(model.dims, tuple(plus), model.biases)
        down = baseline.AutoencoderModel(model.dims, tuple(minus), model.biases)
        numeric = (
            baseline.ae_gradients(up, X)[2] - baseline.ae_gradients(down, X)[2]
        ) / (2 * eps)
        pairs.append((grads_w[layer][i, j], numeric))
    return pairs


class TestAutoencoderModel:
    def test_rejects_asymmetric_dims(self):
        with pytest.raises(ValueError):
            baseline.init_autoencoder([4, 3, 5], seed=0)

    def test_rejects_even_length_dims(self):
        with pytest.raises(ValueError):
            baseline.init_autoencoder([4, 3, 3, 4], seed=0)

    def test_bottleneck_is_middle_layer(self):
        model = baseline.init_autoencoder([6, 4, 2, 4, 6], seed=0)
        assert model.bottleneck_layer == 2
        assert model.encode(np.zeros((3, 6))).shape == (3, 2)


class TestGradients:
    def test_backprop_matches_finite_differences(self, rng):
        """Relative error below 1e-4 on a 10-parameter probe at init."""
        model = baseline.init_autoencoder([7, 5, 7], seed=3)
        X = rng.uniform(0, 1, size=(16, 7))
        for analytic, numeric in finite_difference_probe(model, X):
            scale = max(abs(analytic), abs(numeric), 1e-8)
            assert abs(analytic - numeric) / scale < 1e-4

    def test_deep_network_gradients(self, rng):
        model = baseline.init_autoencoder([6, 5, 3, 5, 6], seed=1)
        X = rng.uniform(0, 1, size=(10, 6))
        for analytic, numeric in finite_difference_probe(model, X, seed=4):
            scale = max(abs(analytic), abs(numeric), 1e-8)
            assert abs(analytic - numeric) / scale < 1e-4


class TestTrainAutoencoder:
    def test_zero_lr_keeps_parameters(self, rng):
        ds = data_mod.LabeledDataset(rng.uniform(0, 1, size=(30, 6)))
        init = baseline.init_autoencoder([6, 3, 6], seed=5)
        trained = baseline.train_autoencoder(ds, [6, 3, 6], epochs=3, lr=0.0, seed=5)
        for a, b in zip(init.weights, trained.weights):
            assert np.array_equal(a, b)

    def test_overcomplete_identity_capable_fit(self, rng):
        """[N, N, N] on small data reaches tiny reconstruction error."""
        ds = data_mod.LabeledDataset(rng.uniform(0.1, 0.9, size=(50, 6)))
        model = baseline.train_autoencoder(
            ds, [6, 6, 6], epochs=800, lr=0.05, batch_size=25, seed=2
        )
        assert baseline.ae_reconstruction_mse(model, ds.features) < 1e-3

    def test_deterministic(self, rng):
        ds = data_mod.LabeledDataset(rng.uniform(0, 1, size=(40, 8)))
        a = baseline.train_autoencoder(ds, [8, 4, 8], epochs=2, seed=9)
        b = baseline.train_autoencoder(ds, [8, 4, 8], epochs=2, seed=9)
        for wa, wb in zip(a.weights, b.weights):
            assert np.array_equal(wa, wb)

    def test_loss_decreases_on_digits(self, digits_surrogate):
        train, _ = digits_surrogate
        before = baseline.init_autoencoder([784, 10, 784], seed=0)
        after = baseline.train_autoencoder(train, [784, 10, 784], epochs=2, seed=0)
        assert baseline.ae_reconstruction_mse(
            after, train.features
        ) < baseline.ae_reconstruction_mse(before, train.features)


class TestEuclideanKmeans:
    def test_two_blobs_recovered_exactly(self, rng):
        a = rng.normal(0.2, 0.02, size=(40, 2))
        b = rng.normal(0.8, 0.02, size=(40, 2))
        ds = data_mod.LabeledDataset(np.clip(np.vstack([a, b]), 0, 1))
        model = baseline.euclidean_kmeans(ds, k=2, seed=0)
        assign = baseline.euclidean_assignments(model.centers.T, ds.features)
        assert len(set(assign[:40])) == 1 and len(set(assign[40:])) == 1
        assert assign[0] != assign[-1]

    def test_k_equals_n_gives_zero_inertia(self, rng):
        feats = rng.uniform(0.1, 0.9, size=(12, 3))
        ds = data_mod.LabeledDataset(feats)
        model = baseline.euclidean_kmeans(ds, k=12, seed=1)
        assert baseline.kmeans_inertia(model, feats) == pytest.approx(0.0, abs=1e-24)

    def test_inertia_non_increasing_over_iterations(self, rng):
        feats = rng.uniform(0, 1, size=(150, 5))
        ds = data_mod.LabeledDataset(feats)
        prev = None
        for iters in range(1, 8):
            model = baseline.euclidean_kmeans(ds, k=5, iters=iters, seed=3)
            inertia = baseline.kmeans_inertia(model, feats)
            if prev is not None:
                assert inertia <= prev + 1e-9
            prev = inertia

    def test_coincident_samples_with_excess_k(self):
        feats = np.tile([[0.5, 0.5]], (6, 1))
        ds = data_mod.LabeledDataset(feats)
        with pytest.raises(EmptyClusterError):
            baseline.euclidean_kmeans(ds, k=3, seed=0)

    def test_synth_fixture_separability(self):
        """Blobs at spread 0.01 are recovered with purity >= 0.99."""
        ds = data_mod.synth_clusters(3, 80, 6, 0.01, seed=11)
        model = baseline.euclidean_kmeans(ds, k=3, seed=4)
        assign = baseline.euclidean_assignments(model.centers.T, ds.features)
        purity = sum(
            np.bincount(ds.labels[assign == j]).max() for j in set(assign)
        ) / ds.n_samples
        assert purity >= 0.99


class TestBottleneckAssignments:
    def test_shape_and_range(self, digits_surrogate):
        train, _ = digits_surrogate
        model = baseline.init_autoencoder([784, 10, 784], seed=0)
        assign = baseline.bottleneck_assignments(model, train.features[:64])
        assert assign.shape == (64,)
        assert assign.min() >= 0 and assign.max() < 10
