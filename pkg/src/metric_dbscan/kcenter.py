"""Radius-guided farthest-point center selection (Gonzalez's greedy driven by
a covering radius bound instead of a fixed k), plus the neighbor-center sets
that confine all later neighborhood searches.

The selection loop repeatedly promotes the point farthest from the current
centers until that farthest distance drops to r_bar. The resulting centers
satisfy a packing guarantee (pairwise distance > r_bar) and a covering
guarantee (every point within r_bar of its closest center), which is what the
clustering layers rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import ConfigError, Dataset
from .metrics import MetricHandle


@dataclass
class CoverStructure:
    """Output of the center-selection stage.

    centers holds point indices in insertion order; closest_center maps each
    point to the ordinal of its assigned center; cover_sets[j] lists the
    points assigned to center j; center_distances is the full center-center
    distance matrix, kept so neighbor sets can be rebuilt for new epsilon
    values without re-running the selection. neighbor_sets[j] lists the
    ordinals of centers within slack*r_bar + epsilon of center j (always
    including j itself) and is populated by build_neighbor_sets.
    """

    dataset: Dataset
    r_bar: float
    start: int
    centers: np.ndarray
    closest_center: np.ndarray
    closest_dist: np.ndarray
    cover_sets: list
    center_distances: np.ndarray
    neighbor_sets: list | None = None
    slack: int | None = None
    epsilon: float | None = None

    @property
    def n_centers(self) -> int:
        return len(self.centers)

    def center_values(self):
        return self.dataset.values_at(self.centers)

    def neighborhood_points(self, ordinal: int, first_own: bool = True) -> list:
        """Cover sets of the neighbor centers of `ordinal`, own set first when
        first_own is set (helps early exit in density counting)."""
        if self.neighbor_sets is None:
            raise ConfigError("neighbor sets not built; call build_neighbor_sets first")
        order = [ordinal] if first_own else []
        order += [int(e) for e in self.neighbor_sets[ordinal] if e != ordinal or not first_own]
        return [self.cover_sets[e] for e in order]


def radius_guided_gonzalez(
    dataset: Dataset,
    metric: MetricHandle,
    r_bar: float,
    start: int = 0,
    prune: bool = True,
) -> CoverStructure:
    """Select centers farthest-first until every point lies within r_bar of a
    center.

    Deterministic: the farthest-point argmax breaks ties toward the lowest
    point index, and a point keeps its earlier center on distance ties. With
    prune=True the per-iteration update sweep skips points whose assignment
    provably cannot change (triangle inequality through the point's current
    center); results are identical to the plain sweep, only the number of
    metric evaluations differs.
    """
    metric.check_dataset(dataset)
    n = dataset.n
    if n == 0:
        raise ConfigError("cannot build a cover over an empty dataset")
    if not r_bar > 0:
        raise ConfigError(f"r_bar must be positive, got {r_bar}")
    if not 0 <= start < n:
        raise ConfigError(f"start index {start} out of range for n={n}")

    points = dataset.all_values()
    centers = [start]
    closest_dist = metric.dist_to_many(dataset.value(start), points)
    closest_center = np.zeros(n, dtype=np.intp)
    center_rows = [np.zeros(1, dtype=np.float64)]  # triangular center-center rows

    while True:
        d_max = closest_dist.max()
        if d_max <= r_bar:
            break
        q = int(np.argmax(closest_dist))  # first maximum -> lowest index
        q_val = dataset.value(q)
        ordinal = len(centers)
        row = metric.dist_to_many(q_val, dataset.values_at(centers))
        if prune:
            # dis(q, p) >= dis(q, c_p) - dis(p, c_p); the new center cannot
            # take over p unless dis(q, c_p) < 2 * closest_dist[p].
            cand = np.flatnonzero(row[closest_center] < 2.0 * closest_dist)
            d_new = metric.dist_to_many(q_val, dataset.values_at(cand))
            better = d_new < closest_dist[cand]
            upd = cand[better]
            closest_dist[upd] = d_new[better]
            closest_center[upd] = ordinal
        else:
            d_new = metric.dist_to_many(q_val, points)
            better = d_new < closest_dist
            closest_dist[better] = d_new[better]
            closest_center[better] = ordinal
        centers.append(q)
        center_rows.append(row)

    m = len(centers)
    matrix = np.zeros((m, m), dtype=np.float64)
    for j, row in enumerate(center_rows):
        matrix[j, :j] = row[:j]
        matrix[:j, j] = row[:j]

    cover_sets = [np.flatnonzero(closest_center == j) for j in range(m)]
    metric.counters.centers = m
    return CoverStructure(
        dataset=dataset,
        r_bar=r_bar,
        start=start,
        centers=np.asarray(centers, dtype=np.intp),
        closest_center=closest_center,
        closest_dist=closest_dist,
        cover_sets=cover_sets,
        center_distances=matrix,
    )


def build_neighbor_sets(cover: CoverStructure, epsilon: float, slack: int) -> CoverStructure:
    """Populate neighbor_sets with the centers within slack*r_bar + epsilon of
    each center.

    slack 2 matches the exact algorithm's search confinement, slack 4 the
    enlarged sets used by the summary-based algorithms. Reusable: call again
    with a different epsilon or slack without re-running center selection.
    """
    if slack not in (2, 4):
        raise ConfigError(f"slack must be 2 or 4, got {slack}")
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    threshold = slack * cover.r_bar + epsilon
    sets = [
        np.flatnonzero(cover.center_distances[j] <= threshold)
        for j in range(cover.n_centers)
    ]
    return replace(cover, neighbor_sets=sets, slack=slack, epsilon=epsilon)
