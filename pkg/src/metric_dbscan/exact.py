"""Exact DBSCAN over a cover structure.

The pipeline follows the classic three tasks, each confined to the local
neighborhoods the cover structure provides: (1) flag core points, with a free
pass for every point whose cover set is already dense enough; (2) merge core
groups whose closest pair lies within epsilon, deciding each pair with
cover-tree nearest-neighbor queries; (3) attach border points to their
nearest core and mark the rest outliers.

A second preprocessing mode derives the center set from one level of a cover
tree built over the whole dataset instead of running the greedy selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import covertree
from .core import (
    OUTLIER_ID,
    Clustering,
    ConfigError,
    Dataset,
    DisjointSet,
    Params,
    Role,
    RunCounters,
    canonicalize,
    empty_clustering,
)
from .covertree import floor_log2, level_net, nearest_neighbor
from .kcenter import CoverStructure, build_neighbor_sets, radius_guided_gonzalez
from .metrics import MetricHandle

MODES = ("gonzalez", "covertree_net")


@dataclass
class CoreMerge:
    """Core points grouped by center, plus the merged components over centers."""

    core_sets: list
    components: DisjointSet


def _reaches_min_pts(metric, dataset, value, blocks, epsilon, min_pts) -> bool:
    """Count points within epsilon of value across the candidate blocks,
    stopping as soon as min_pts is reached."""
    count = 0
    for block in blocks:
        if len(block) == 0:
            continue
        d = metric.dist_to_many(value, dataset.values_at(block))
        count += int((d <= epsilon).sum())
        if count >= min_pts:
            return True
    return False


def label_core_points(cover: CoverStructure, metric: MetricHandle, min_pts: int) -> np.ndarray:
    """Flag every point with at least min_pts points (itself included) within
    epsilon.

    Points in a cover set of size >= min_pts are core without any distance
    evaluation: with r_bar <= epsilon/2 the whole set sits inside their
    epsilon-ball. Everyone else is counted against the neighbor centers'
    cover sets only, which is exhaustive for the epsilon-ball.
    """
    if cover.neighbor_sets is None or cover.slack != 2:
        raise ConfigError("core labeling requires neighbor sets built at slack 2")
    epsilon = cover.epsilon
    if cover.r_bar > epsilon / 2.0:
        raise ConfigError(
            f"core labeling requires r_bar <= epsilon/2, got r_bar={cover.r_bar} epsilon={epsilon}"
        )
    dataset = cover.dataset
    flags = np.zeros(dataset.n, dtype=bool)
    for j in range(cover.n_centers):
        members = cover.cover_sets[j]
        if len(members) >= min_pts:
            flags[members] = True
            continue
        blocks = cover.neighborhood_points(j)
        for p in members:
            flags[p] = _reaches_min_pts(
                metric, dataset, dataset.value(int(p)), blocks, epsilon, min_pts
            )
    return flags


def _groups_touch(cover, metric, core_sets, trees, e, e2) -> bool:
    """Decide whether the closest pair between two core groups is within
    epsilon. Builds (and caches) a cover tree on one side and queries the
    other, bailing out on the first hit; singleton sides use a direct scan."""
    dataset = cover.dataset
    epsilon = cover.epsilon
    a, b = core_sets[e], core_sets[e2]
    if min(len(a), len(b)) == 1:
        single, other = (a, b) if len(a) == 1 else (b, a)
        d = metric.dist_to_many(dataset.value(int(single[0])), dataset.values_at(other))
        return bool((d <= epsilon).any())
    if e in trees:
        tree, queries = trees[e], b
    elif e2 in trees:
        tree, queries = trees[e2], a
    else:
        indexed, queries = (e, b) if len(a) >= len(b) else (e2, a)
        trees[indexed] = covertree.build(core_sets[indexed], dataset, metric)
        tree = trees[indexed]
    for q in queries:
        _, d = nearest_neighbor(tree, dataset.value(int(q)), early_stop=epsilon)
        if d <= epsilon:
            return True
    return False


def merge_core_points(cover: CoverStructure, core_flags: np.ndarray, metric: MetricHandle) -> CoreMerge:
    """Union the center components whose core groups have a closest pair
    within epsilon; only neighbor-center pairs can qualify."""
    core_sets = [members[core_flags[members]] for members in cover.cover_sets]
    components = DisjointSet(cover.n_centers)
    trees: dict = {}
    for e in range(cover.n_centers):
        if len(core_sets[e]) == 0:
            continue
        for e2 in cover.neighbor_sets[e]:
            e2 = int(e2)
            if e2 <= e or len(core_sets[e2]) == 0:
                continue
            if components.find(e) == components.find(e2):
                continue
            if _groups_touch(cover, metric, core_sets, trees, e, e2):
                components.union(e, e2)
    return CoreMerge(core_sets=core_sets, components=components)


def assign_border_outliers(
    cover: CoverStructure,
    merge: CoreMerge,
    metric: MetricHandle,
    core_flags: np.ndarray,
) -> Clustering:
    """Attach each non-core point to the cluster of its nearest core within
    epsilon (ties to the lowest cluster id, other reachable clusters recorded
    as alternatives); the rest are outliers."""
    dataset = cover.dataset
    epsilon = cover.epsilon
    n = dataset.n
    ids = np.full(n, OUTLIER_ID, dtype=np.int64)
    roles = np.full(n, Role.OUTLIER, dtype=np.int8)

    # Provisional cluster ids: component roots numbered by first core point.
    root_to_id: dict = {}
    for p in np.flatnonzero(core_flags):
        root = merge.components.find(int(cover.closest_center[p]))
        if root not in root_to_id:
            root_to_id[root] = len(root_to_id)
        ids[p] = root_to_id[root]
        roles[p] = Role.CORE

    alternatives: dict = {}
    candidate_cache: dict = {}
    for p in np.flatnonzero(~core_flags):
        c = int(cover.closest_center[p])
        cand = candidate_cache.get(c)
        if cand is None:
            parts = [merge.core_sets[int(e)] for e in cover.neighbor_sets[c]]
            cand = np.concatenate(parts) if parts else np.empty(0, dtype=np.intp)
            candidate_cache[c] = cand
        if len(cand) == 0:
            continue
        d = metric.dist_to_many(dataset.value(int(p)), dataset.values_at(cand))
        within = d <= epsilon
        if not within.any():
            continue
        d_within = d[within]
        clusters_within = ids[cand[within]]
        chosen = int(clusters_within[d_within == d_within.min()].min())
        ids[p] = chosen
        roles[p] = Role.BORDER
        others = sorted(set(int(x) for x in clusters_within) - {chosen})
        if others:
            alternatives[p] = tuple(others)

    return canonicalize(
        Clustering(roles=roles, cluster_ids=ids, k=len(root_to_id), border_alternatives=alternatives)
    )


def cover_from_net(dataset: Dataset, metric: MetricHandle, epsilon: float) -> CoverStructure:
    """Derive a cover structure from the cover-tree level whose net radius
    2^floor(log2(epsilon/2)) fits under epsilon/2, assigning every point to
    its nearest net member (ties to the lowest index)."""
    tree = covertree.build(range(dataset.n), dataset, metric)
    i0 = floor_log2(epsilon / 2.0)
    net = level_net(tree, i0)
    r_bar = math.ldexp(1.0, i0)

    n = dataset.n
    position = {int(idx): j for j, idx in enumerate(net)}
    closest_center = np.empty(n, dtype=np.intp)
    closest_dist = np.empty(n, dtype=np.float64)
    if len(net) == 1:
        closest_center[:] = 0
        closest_dist[:] = metric.dist_to_many(dataset.value(int(net[0])), dataset.all_values())
    else:
        net_tree = covertree.build(net, dataset, metric)
        for p in range(n):
            idx, d = nearest_neighbor(net_tree, dataset.value(p))
            closest_center[p] = position[idx]
            closest_dist[p] = d
    cover_sets = [np.flatnonzero(closest_center == j) for j in range(len(net))]
    matrix = metric.pairwise(dataset.values_at(net))
    metric.counters.centers = len(net)
    return CoverStructure(
        dataset=dataset,
        r_bar=r_bar,
        start=-1,
        centers=net.astype(np.intp),
        closest_center=closest_center,
        closest_dist=closest_dist,
        cover_sets=cover_sets,
        center_distances=matrix,
    )


def exact_dbscan(
    dataset: Dataset,
    metric: MetricHandle,
    epsilon: float,
    min_pts: int,
    mode: str = "gonzalez",
    r_bar: float | None = None,
    start: int = 0,
):
    """Run exact DBSCAN; returns (Clustering, RunCounters).

    mode "gonzalez" selects centers greedily with r_bar defaulting to
    epsilon/2; mode "covertree_net" extracts the center set from a cover tree
    level instead. Core flags and the core-point partition match the
    brute-force definition exactly in both modes.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    params = Params(epsilon=epsilon, min_pts=min_pts, r_bar=r_bar)
    metric.check_dataset(dataset)
    counters = metric.counters
    if dataset.n == 0:
        return empty_clustering(0), counters

    if mode == "gonzalez":
        with counters.phase("gonzalez"):
            cover = radius_guided_gonzalez(dataset, metric, params.exact_radius(), start=start)
    else:
        if r_bar is not None:
            raise ConfigError("covertree_net mode derives r_bar from the tree level")
        with counters.phase("covertree_net"):
            cover = cover_from_net(dataset, metric, epsilon)
    with counters.phase("neighbor_sets"):
        cover = build_neighbor_sets(cover, epsilon, slack=2)
    with counters.phase("label_cores"):
        core_flags = label_core_points(cover, metric, min_pts)
    with counters.phase("merge_cores"):
        merge = merge_core_points(cover, core_flags, metric)
    with counters.phase("assign_rest"):
        clustering = assign_border_outliers(cover, merge, metric, core_flags)
    return clustering, counters
