"""Shared domain types: datasets, run parameters, clustering results,
instrumentation counters, and a disjoint-set forest."""

from __future__ import annotations

import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

OUTLIER_ID = -1

NUMERIC = "numeric"
STRING = "string"


class ConfigError(ValueError):
    """Invalid run parameters or a structure used outside its preconditions."""


class Role(IntEnum):
    CORE = 0
    BORDER = 1
    OUTLIER = 2


ROLE_NAMES = {Role.CORE: "core", Role.BORDER: "border", Role.OUTLIER: "outlier"}
ROLE_BY_NAME = {v: k for k, v in ROLE_NAMES.items()}


@dataclass(frozen=True)
class Dataset:
    """Immutable, densely indexed point collection.

    Points are either rows of a fixed-width float64 matrix or plain strings.
    Index i refers to the same point for the lifetime of the dataset.
    """

    points: object
    kind: str

    @classmethod
    def from_vectors(cls, vectors) -> "Dataset":
        arr = np.asarray(vectors, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError(f"numeric points must form a 2-D array, got ndim={arr.ndim}")
        if arr.shape[1] < 1:
            raise ValueError("numeric points need dimensionality >= 1")
        arr = arr.copy()
        arr.flags.writeable = False
        return cls(points=arr, kind=NUMERIC)

    @classmethod
    def from_strings(cls, strings) -> "Dataset":
        items = tuple(str(s) for s in strings)
        return cls(points=items, kind=STRING)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        if self.kind != NUMERIC:
            raise AttributeError("string datasets have no dimensionality")
        return self.points.shape[1]

    def value(self, i: int):
        return self.points[i]

    def values_at(self, indices):
        """Point values for a batch of indices, in the given order."""
        if self.kind == NUMERIC:
            return self.points[np.asarray(indices, dtype=np.intp)]
        return [self.points[int(i)] for i in indices]

    def all_values(self):
        return self.points


# Positive floor used when a zero relaxation parameter would collapse the
# covering radius to 0; keeps the greedy cover loop well defined.
_TINY = sys.float_info.min


@dataclass(frozen=True)
class Params:
    """DBSCAN run parameters.

    epsilon and min_pts follow the classic definition; rho is the relaxation
    factor of the approximate/streaming algorithms; r_bar optionally overrides
    the covering radius used by the preprocessing stage.
    """

    epsilon: float
    min_pts: int
    rho: float | None = None
    r_bar: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.min_pts) != self.min_pts or self.min_pts < 1:
            raise ConfigError(f"min_pts must be a positive integer, got {self.min_pts}")

    def exact_radius(self) -> float:
        """Covering radius for the exact algorithm; any value <= epsilon/2 is sound."""
        r = self.epsilon / 2.0 if self.r_bar is None else float(self.r_bar)
        if not 0 < r <= self.epsilon / 2.0:
            raise ConfigError(
                f"exact mode needs 0 < r_bar <= epsilon/2, got r_bar={r} epsilon={self.epsilon}"
            )
        return r

    def approx_radius(self) -> float:
        """Covering radius rho*epsilon/2 for the approximate/streaming algorithms."""
        if self.rho is None:
            raise ConfigError("approximate/streaming mode requires rho")
        if not 0 <= self.rho <= 2:
            raise ConfigError(f"rho must lie in [0, 2], got {self.rho}")
        r = self.rho * self.epsilon / 2.0
        if r == 0.0:
            # rho = 0 degenerates to one center per distinct point.
            r = max(self.epsilon * _TINY, _TINY)
        if self.r_bar is not None and self.r_bar != r:
            raise ConfigError(
                f"approximate mode pins r_bar = rho*epsilon/2 = {r}, got override {self.r_bar}"
            )
        return r


@dataclass
class RunCounters:
    """Instrumentation for one clustering run: metric evaluations, phase
    wall-clock times, and structure sizes."""

    distance_evals: int = 0
    phase_times: dict = field(default_factory=dict)
    centers: int = 0
    summary_size: int = 0
    retained: int = 0

    def add_evals(self, k: int) -> None:
        self.distance_evals += int(k)

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - t0
            self.phase_times[name] = self.phase_times.get(name, 0.0) + elapsed

    @property
    def total_time(self) -> float:
        return sum(self.phase_times.values())


class DisjointSet:
    """Union-find over 0..n-1 with path halving and union by rank."""

    def __init__(self, n: int):
        self._parent = list(range(n))
        self._rank = [0] * n
        self.n_components = n

    def find(self, x: int) -> int:
        parent = self._parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of a and b; True iff they were distinct."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self._rank[ra] < self._rank[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        if self._rank[ra] == self._rank[rb]:
            self._rank[ra] += 1
        self.n_components -= 1
        return True


@dataclass
class Clustering:
    """Per-point role and cluster assignment.

    Cluster ids are dense 0..k-1 after canonicalization; outliers carry
    OUTLIER_ID. border_alternatives lists the other valid cluster ids of a
    border point reachable from several clusters; None means the information
    is unavailable (e.g. the clustering was reloaded from a labels file).
    """

    roles: np.ndarray
    cluster_ids: np.ndarray
    k: int
    border_alternatives: dict | None = None

    @property
    def n(self) -> int:
        return len(self.cluster_ids)

    def labels_for(self, idx: int) -> tuple:
        """Primary id plus any alternatives for point idx."""
        extra = ()
        if self.border_alternatives is not None:
            extra = self.border_alternatives.get(idx, ())
        return (int(self.cluster_ids[idx]),) + tuple(extra)


def empty_clustering(n: int = 0) -> Clustering:
    return Clustering(
        roles=np.full(n, Role.OUTLIER, dtype=np.int8),
        cluster_ids=np.full(n, OUTLIER_ID, dtype=np.int64),
        k=0,
        border_alternatives={},
    )


def canonicalize(clustering: Clustering) -> Clustering:
    """Relabel cluster ids to 0..k-1 in order of first appearance by point
    index; roles and the underlying partition are unchanged."""
    mapping: dict = {}
    ids = clustering.cluster_ids
    new_ids = np.full_like(ids, OUTLIER_ID)
    for i, cid in enumerate(ids):
        cid = int(cid)
        if cid == OUTLIER_ID:
            continue
        if cid not in mapping:
            mapping[cid] = len(mapping)
        new_ids[i] = mapping[cid]
    alts = clustering.border_alternatives
    if alts is not None:
        alts = {
            i: tuple(sorted(mapping[a] for a in extra if a in mapping))
            for i, extra in alts.items()
            if extra
        }
        alts = {i: extra for i, extra in alts.items() if extra}
    return replace(clustering, cluster_ids=new_ids, k=len(mapping), border_alternatives=alts)
