"""Relaxed (rho-approximate) DBSCAN via a core-point summary.

Instead of solving closest-pair problems between all core groups, the
algorithm keeps one representative per dense center (the center itself) plus
every core point of the sparse centers. Merging happens only inside this
summary at the relaxed threshold (1+rho)*epsilon, and all remaining points
are labeled against the summary. The covering radius is pinned to
rho*epsilon/2, which is what makes a summary-kept representative reachable
within the relaxed bounds from any core point it stands for.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import (
    OUTLIER_ID,
    Clustering,
    ConfigError,
    Dataset,
    DisjointSet,
    Params,
    Role,
    canonicalize,
    empty_clustering,
)
from .kcenter import CoverStructure, build_neighbor_sets, radius_guided_gonzalez
from .metrics import MetricHandle


@dataclass
class Summary:
    """Core-point summary: members in center-major order, each member's owner
    center, per-center core flags, and (after merging) per-member cluster ids.

    representative[q] is the summary point standing in for core point q: its
    center when that center is core, otherwise q itself. -1 for non-core
    points."""

    members: np.ndarray
    owner_center: np.ndarray
    center_is_core: np.ndarray
    positions_by_center: list
    representative: np.ndarray
    cluster_of: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.members)


def build_core_summary(cover: CoverStructure, metric: MetricHandle, min_pts: int):
    """Flag core points and assemble the summary; returns (Summary, core flags).

    A core center contributes only itself; a non-core center contributes all
    core points of its cover set. Dense cover sets short-circuit the core
    test for the center always (members sit within r_bar <= epsilon of it)
    and for the members too when 2*r_bar <= epsilon.
    """
    if cover.neighbor_sets is None or cover.slack != 4:
        raise ConfigError("summary construction requires neighbor sets built at slack 4")
    epsilon = cover.epsilon
    if cover.r_bar > epsilon:
        raise ConfigError(
            f"summary construction requires rho <= 2 (r_bar <= epsilon), got r_bar={cover.r_bar}"
        )
    dataset = cover.dataset
    n = dataset.n
    m = cover.n_centers
    flags = np.zeros(n, dtype=bool)
    center_is_core = np.zeros(m, dtype=bool)
    members_shortcut = 2.0 * cover.r_bar <= epsilon

    for e in range(m):
        members = cover.cover_sets[e]
        dense = len(members) >= min_pts
        if dense and members_shortcut:
            flags[members] = True
            center_is_core[e] = True
            continue
        blocks = cover.neighborhood_points(e)
        center_point = int(cover.centers[e])
        if dense:
            center_is_core[e] = True
        else:
            center_is_core[e] = _reaches(metric, dataset, center_point, blocks, epsilon, min_pts)
        flags[center_point] = center_is_core[e]
        for p in members:
            p = int(p)
            if p == center_point:
                continue
            flags[p] = _reaches(metric, dataset, p, blocks, epsilon, min_pts)

    member_list: list[int] = []
    owner_list: list[int] = []
    for e in range(m):
        if center_is_core[e]:
            member_list.append(int(cover.centers[e]))
            owner_list.append(e)
        else:
            for p in cover.cover_sets[e][flags[cover.cover_sets[e]]]:
                member_list.append(int(p))
                owner_list.append(e)

    members = np.asarray(member_list, dtype=np.intp)
    owners = np.asarray(owner_list, dtype=np.intp)
    positions_by_center = [np.flatnonzero(owners == e) for e in range(m)]

    representative = np.full(n, -1, dtype=np.intp)
    for q in np.flatnonzero(flags):
        c = int(cover.closest_center[q])
        representative[q] = cover.centers[c] if center_is_core[c] else q

    metric.counters.summary_size = len(members)
    return (
        Summary(
            members=members,
            owner_center=owners,
            center_is_core=center_is_core,
            positions_by_center=positions_by_center,
            representative=representative,
        ),
        flags,
    )


def _reaches(metric, dataset, point, blocks, epsilon, min_pts) -> bool:
    count = 0
    value = dataset.value(point)
    for block in blocks:
        if len(block) == 0:
            continue
        d = metric.dist_to_many(value, dataset.values_at(block))
        count += int((d <= epsilon).sum())
        if count >= min_pts:
            return True
    return False


def merge_summary(summary: Summary, cover: CoverStructure, metric: MetricHandle, rho: float) -> Summary:
    """Connected components of the summary under distance (1+rho)*epsilon,
    with candidate pairs confined to the neighbor centers' summary points."""
    threshold = (1.0 + rho) * cover.epsilon
    dataset = cover.dataset
    components = DisjointSet(summary.size)
    for pos in range(summary.size):
        c = int(summary.owner_center[pos])
        parts = [summary.positions_by_center[int(e)] for e in cover.neighbor_sets[c]]
        cand = np.concatenate(parts) if parts else np.empty(0, dtype=np.intp)
        cand = cand[cand > pos]
        if len(cand) == 0:
            continue
        d = metric.dist_to_many(
            dataset.value(int(summary.members[pos])),
            dataset.values_at(summary.members[cand]),
        )
        for other in cand[d <= threshold]:
            components.union(pos, int(other))

    cluster_of = np.full(summary.size, OUTLIER_ID, dtype=np.int64)
    root_to_id: dict = {}
    for pos in range(summary.size):
        root = components.find(pos)
        if root not in root_to_id:
            root_to_id[root] = len(root_to_id)
        cluster_of[pos] = root_to_id[root]
    return replace(summary, cluster_of=cluster_of)


def label_points_approx(
    summary: Summary,
    cover: CoverStructure,
    metric: MetricHandle,
    rho: float,
    core_flags: np.ndarray,
) -> Clustering:
    """Label every point from the merged summary: summary members keep their
    cluster, points under a core center inherit it, and the rest join the
    nearest summary point within (rho/2+1)*epsilon or become outliers."""
    if summary.cluster_of is None:
        raise ConfigError("summary must be merged before labeling")
    dataset = cover.dataset
    epsilon = cover.epsilon
    threshold = (rho / 2.0 + 1.0) * epsilon
    n = dataset.n
    ids = np.full(n, OUTLIER_ID, dtype=np.int64)
    roles = np.full(n, Role.OUTLIER, dtype=np.int8)
    alternatives: dict = {}

    in_summary = np.zeros(n, dtype=bool)
    in_summary[summary.members] = True
    ids[summary.members] = summary.cluster_of
    roles[summary.members] = Role.CORE

    center_pos = np.full(cover.n_centers, -1, dtype=np.intp)
    for pos, (pt, owner) in enumerate(zip(summary.members, summary.owner_center)):
        if int(pt) == int(cover.centers[owner]):
            center_pos[owner] = pos

    candidate_cache: dict = {}
    for p in np.flatnonzero(~in_summary):
        p = int(p)
        c = int(cover.closest_center[p])
        if summary.center_is_core[c]:
            ids[p] = summary.cluster_of[center_pos[c]]
            roles[p] = Role.CORE if core_flags[p] else Role.BORDER
            continue
        cand = candidate_cache.get(c)
        if cand is None:
            parts = [summary.positions_by_center[int(e)] for e in cover.neighbor_sets[c]]
            cand = np.concatenate(parts) if parts else np.empty(0, dtype=np.intp)
            candidate_cache[c] = cand
        if len(cand) == 0:
            continue
        d = metric.dist_to_many(dataset.value(p), dataset.values_at(summary.members[cand]))
        within = d <= threshold
        if not within.any():
            continue
        # Only non-core points can reach this branch: a core point is either
        # in the summary itself or sits under a core center.
        assert not core_flags[p]
        d_within = d[within]
        clusters_within = summary.cluster_of[cand[within]]
        chosen = int(clusters_within[d_within == d_within.min()].min())
        ids[p] = chosen
        roles[p] = Role.BORDER
        others = sorted(set(int(x) for x in clusters_within) - {chosen})
        if others:
            alternatives[p] = tuple(others)

    k = int(summary.cluster_of.max()) + 1 if summary.size else 0
    return canonicalize(
        Clustering(roles=roles, cluster_ids=ids, k=k, border_alternatives=alternatives)
    )


def approx_dbscan(
    dataset: Dataset,
    metric: MetricHandle,
    epsilon: float,
    min_pts: int,
    rho: float,
    start: int = 0,
):
    """Run rho-approximate DBSCAN; returns (Clustering, RunCounters).

    0 < rho <= 2; rho = 0 is accepted as a degenerate mode whose core
    partition coincides with exact DBSCAN."""
    params = Params(epsilon=epsilon, min_pts=min_pts, rho=rho)
    r_bar = params.approx_radius()
    metric.check_dataset(dataset)
    counters = metric.counters
    if dataset.n == 0:
        return empty_clustering(0), counters

    with counters.phase("gonzalez"):
        cover = radius_guided_gonzalez(dataset, metric, r_bar, start=start)
    with counters.phase("neighbor_sets"):
        cover = build_neighbor_sets(cover, epsilon, slack=4)
    with counters.phase("build_summary"):
        summary, core_flags = build_core_summary(cover, metric, min_pts)
    with counters.phase("merge_summary"):
        summary = merge_summary(summary, cover, metric, rho)
    with counters.phase("label_rest"):
        clustering = label_points_approx(summary, cover, metric, rho, core_flags)
    return clustering, counters
