"""Deterministic synthetic datasets for experiments and tests."""

from __future__ import annotations

import numpy as np


def two_moons(n: int, noise: float = 0.05, seed: int = 0):
    """Two interleaved half-circles with Gaussian jitter.

    Points come out in curve order (all of moon 0 along its arc, then moon 1),
    which also makes the array a natural stream order. Returns (points, labels).
    """
    rng = np.random.default_rng(seed)
    n0 = n // 2
    n1 = n - n0
    t0 = np.linspace(0.0, np.pi, n0)
    t1 = np.linspace(0.0, np.pi, n1)
    upper = np.column_stack([np.cos(t0), np.sin(t0)])
    lower = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    pts = np.vstack([upper, lower]) + rng.normal(0.0, noise, size=(n, 2))
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    return pts, labels


def gaussian_mixture(
    n: int,
    n_clusters: int = 3,
    noise_fraction: float = 0.03,
    seed: int = 0,
    spread: float = 0.6,
    box: float = 10.0,
):
    """2-D Gaussian blobs plus a uniform-noise fraction scattered over the box.

    Noise points get label -1. Returns (points, labels)."""
    rng = np.random.default_rng(seed)
    n_noise = int(round(n * noise_fraction))
    n_clustered = n - n_noise
    means = rng.uniform(0.15 * box, 0.85 * box, size=(n_clusters, 2))
    assignment = rng.integers(0, n_clusters, size=n_clustered)
    pts = means[assignment] + rng.normal(0.0, spread, size=(n_clustered, 2))
    labels = assignment.astype(np.int64)
    if n_noise:
        noise_pts = rng.uniform(0.0, box, size=(n_noise, 2))
        pts = np.vstack([pts, noise_pts])
        labels = np.concatenate([labels, np.full(n_noise, -1, dtype=np.int64)])
    return pts, labels
