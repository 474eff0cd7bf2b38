"""Distance functions over numeric and string points, with evaluation
counting.

All clustering code measures distances through a MetricHandle so that every
metric evaluation lands in one RunCounters instance. The bulk entry points
(dist_to_many, pairwise) compute the same values as repeated dist() calls and
count one evaluation per pair.
"""

from __future__ import annotations

import numpy as np

from .core import NUMERIC, STRING, ConfigError, Dataset, RunCounters


def euclidean(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimensionality mismatch: {a.shape[0]} vs {b.shape[0]}")
    d = a - b
    return float(np.sqrt(np.dot(d, d)))


def manhattan(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimensionality mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.abs(a - b).sum())


def edit_distance(a: str, b: str) -> float:
    """Unit-cost Levenshtein distance, exact integer widened to float."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return float(len(a))
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cost = previous[j - 1] + (ca != cb)
            current[j] = min(previous[j] + 1, current[j - 1] + 1, cost)
        previous = current
    return float(previous[-1])


def _euclidean_many(a, batch: np.ndarray) -> np.ndarray:
    diff = batch - a
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _manhattan_many(a, batch: np.ndarray) -> np.ndarray:
    return np.abs(batch - a).sum(axis=1)


class MetricHandle:
    """A named metric bound to a RunCounters instance."""

    def __init__(self, name: str, counters: RunCounters | None = None):
        if name not in _KERNELS:
            raise ConfigError(f"unknown metric {name!r}; choose from {sorted(_KERNELS)}")
        self.name = name
        self.compatible_kind = STRING if name == "edit" else NUMERIC
        self.counters = counters if counters is not None else RunCounters()
        self._kernel, self._bulk = _KERNELS[name]

    def check_dataset(self, dataset: Dataset) -> None:
        if dataset.kind != self.compatible_kind:
            raise ConfigError(
                f"metric {self.name!r} expects {self.compatible_kind} points, "
                f"dataset holds {dataset.kind}"
            )

    def dist(self, a, b) -> float:
        self.counters.add_evals(1)
        return self._kernel(a, b)

    def dist_to_many(self, a, batch) -> np.ndarray:
        """Distances from one point to each point of a batch."""
        if len(batch) == 0:
            return np.empty(0, dtype=np.float64)
        self.counters.add_evals(len(batch))
        if self._bulk is not None:
            return self._bulk(a, np.asarray(batch, dtype=np.float64))
        return np.array([self._kernel(a, b) for b in batch], dtype=np.float64)

    def pairwise(self, batch) -> np.ndarray:
        """Full symmetric distance matrix with a zero diagonal; counts
        m*(m-1)/2 evaluations."""
        m = len(batch)
        out = np.zeros((m, m), dtype=np.float64)
        self.counters.add_evals(m * (m - 1) // 2)
        if self._bulk is not None:
            arr = np.asarray(batch, dtype=np.float64)
            for i in range(m - 1):
                row = self._bulk(arr[i], arr[i + 1 :])
                out[i, i + 1 :] = row
                out[i + 1 :, i] = row
        else:
            for i in range(m - 1):
                for j in range(i + 1, m):
                    out[i, j] = out[j, i] = self._kernel(batch[i], batch[j])
        return out


_KERNELS = {
    "euclidean": (euclidean, _euclidean_many),
    "manhattan": (manhattan, _manhattan_many),
    "edit": (edit_distance, None),
}

METRIC_NAMES = tuple(sorted(_KERNELS))


def make_metric(name: str, counters: RunCounters | None = None) -> MetricHandle:
    return MetricHandle(name, counters)
