"""Testes para o baseline PCA + k-means."""

import warnings

import numpy as np
import pytest
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from sensorscan.services.baseline_service import BaselineService
from sensorscan.services.metrics_service import MetricsService
from sensorscan.utils.errors import ValidationError


def blob_windows(n_per_blob: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=5.0, size=(3, 4, 3))
    labels = np.repeat(np.arange(3), n_per_blob)
    windows = centers[labels] + 0.2 * rng.normal(size=(labels.size, 4, 3))
    return windows, labels


def test_separated_blobs_are_recovered():
    """Testa ACC 1 em blobs bem separados em pelo menos 9 de 10 seeds."""
    successes = 0
    for seed in range(10):
        windows, labels = blob_windows(30, seed)
        result = BaselineService.baseline_pca_kmeans(
            windows, windows[::3], n_clusters=3, dims=4, seed=seed
        )
        if MetricsService.acc(labels, result.train_clusters) == 1.0:
            successes += 1
            np.testing.assert_array_equal(result.test_clusters, result.train_clusters[::3])
    assert successes >= 9


def test_lloyd_objective_is_non_increasing():
    """Testa que a inércia não cresce com mais iterações de Lloyd a partir do mesmo início."""
    rng = np.random.default_rng(0)
    points = rng.normal(size=(200, 5))
    init = points[:4]
    inertias = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for max_iter in range(1, 12):
            kmeans = KMeans(n_clusters=4, init=init, n_init=1, max_iter=max_iter, tol=0.0)
            inertias.append(kmeans.fit(points).inertia_)
    assert all(b <= a + 1e-9 for a, b in zip(inertias, inertias[1:]))


def test_baseline_is_deterministic():
    """Testa atribuições idênticas para a mesma seed."""
    windows, _ = blob_windows(20, 4)
    first = BaselineService.baseline_pca_kmeans(windows, windows, 3, dims=3, seed=2)
    second = BaselineService.baseline_pca_kmeans(windows, windows, 3, dims=3, seed=2)
    np.testing.assert_array_equal(first.train_clusters, second.train_clusters)
    assert first.inertia == second.inertia


def test_baseline_rejects_too_many_dims():
    """Testa dims > min(N, L·D)."""
    windows, _ = blob_windows(2, 0)
    with pytest.raises(ValidationError):
        BaselineService.baseline_pca_kmeans(windows, windows, 2, dims=13)


def test_baseline_with_empty_test_set():
    """Testa um conjunto de teste vazio."""
    windows, _ = blob_windows(10, 1)
    result = BaselineService.baseline_pca_kmeans(windows, windows[:0], 3, dims=2)
    assert result.test_clusters.shape == (0,)
    assert result.train_clusters.shape == (30,)
