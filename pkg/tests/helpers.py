"""Shared test utilities: independent oracles and structure checkers.

Everything here recomputes distances with plain numpy so the checks stay
independent of the package's counted metric paths."""

from __future__ import annotations

import math

import numpy as np

from metric_dbscan import Dataset, Role, make_metric


def numeric_dataset(points) -> Dataset:
    return Dataset.from_vectors(np.asarray(points, dtype=np.float64))


def euclidean_matrix(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    diff = values[:, None, :] - values[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def fresh_metric(name: str = "euclidean"):
    return make_metric(name)


def core_flags_oracle(values, epsilon, min_pts) -> np.ndarray:
    dist = euclidean_matrix(values)
    return (dist <= epsilon).sum(axis=1) >= min_pts


def partitions_equal(ids_a, ids_b, subset) -> bool:
    """Same-group relation restricted to `subset` agrees between labelings."""
    subset = np.asarray(subset)
    map_a: dict = {}
    map_b: dict = {}
    for p in subset:
        a, b = int(ids_a[p]), int(ids_b[p])
        if map_a.setdefault(a, b) != b:
            return False
        if map_b.setdefault(b, a) != a:
            return False
    return True


def same_exact_solution(result, oracle) -> bool:
    """Core flags identical, core partition identical, outlier sets identical."""
    cores_r = result.roles == Role.CORE
    cores_o = oracle.roles == Role.CORE
    if not np.array_equal(cores_r, cores_o):
        return False
    if not np.array_equal(result.roles == Role.OUTLIER, oracle.roles == Role.OUTLIER):
        return False
    return partitions_equal(result.cluster_ids, oracle.cluster_ids, np.flatnonzero(cores_o))


def check_tree_structure(tree) -> None:
    """Audit every level pair: nesting, packing, covering, parent links."""
    dataset = tree.dataset
    values = np.asarray([dataset.value(int(i)) for i in tree.node_points], dtype=np.float64)
    dist = euclidean_matrix(values)
    levels = {
        i: set(np.flatnonzero(tree.entry_level >= i)) for i in range(tree.l_bottom, tree.l_top + 1)
    }
    assert len(levels[tree.l_top]) == 1, "top level must hold exactly the root"
    assert levels[tree.l_bottom] == set(range(tree.n_nodes)), "bottom level must hold all nodes"
    for i in range(tree.l_bottom + 1, tree.l_top + 1):
        upper, lower = levels[i], levels[i - 1]
        assert upper <= lower, f"nesting violated at level {i}"
        members = sorted(upper)
        r = math.ldexp(1.0, i)
        for a_pos, a in enumerate(members):
            for b in members[a_pos + 1 :]:
                assert dist[a, b] >= r, f"packing violated at level {i}: {a},{b}"
        for p in lower:
            assert min(dist[p, q] for q in upper) <= r, f"covering violated at level {i}: {p}"
    for parent, by_level in enumerate(tree.children):
        for child_level, kids in by_level.items():
            bound = math.ldexp(1.0, child_level + 1)
            for child in kids:
                assert tree.entry_level[child] == child_level
                assert tree.entry_level[parent] >= child_level + 1
                assert dist[parent, child] <= bound, "parent-child covering violated"


def check_net(dataset, net_indices, radius) -> None:
    """Def.-style r-net audit of `net_indices` against the distinct points."""
    values = np.asarray(dataset.all_values(), dtype=np.float64)
    distinct = np.unique(values, axis=0)
    net_vals = values[np.asarray(net_indices, dtype=int)]
    for i in range(len(net_vals)):
        for j in range(i + 1, len(net_vals)):
            assert np.linalg.norm(net_vals[i] - net_vals[j]) >= radius, "net packing violated"
    for p in distinct:
        assert np.linalg.norm(net_vals - p, axis=1).min() <= radius, "net covering violated"


def linear_scan_nn(values, query):
    d = np.linalg.norm(np.asarray(values, dtype=np.float64) - np.asarray(query), axis=1)
    return int(np.argmin(d)), float(d.min())
