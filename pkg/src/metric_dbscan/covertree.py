"""Vanilla cover tree: a hierarchy of nested nets where the node set of level
i is a 2^i-net of the level below, supporting nearest-neighbor descent and
direct extraction of a level's net.

Construction orders the (deduplicated) points farthest-first and derives each
point's entry level from its insertion radius. This yields a tree whose level
sets are nets not only of the next level down but of the whole point set,
which the net-extraction consumers rely on. Duplicates are folded into a
multiplicity map before insertion; consumers that count points must re-expand
multiplicities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, Dataset
from .metrics import MetricHandle


def floor_log2(x: float) -> int:
    """Exponent extraction: largest i with 2**i <= x, exact for any float x > 0."""
    if not x > 0:
        raise ValueError(f"floor_log2 needs a positive value, got {x}")
    return math.frexp(x)[1] - 1


def _pow2(i: int) -> float:
    return math.ldexp(1.0, i)


@dataclass
class CoverTree:
    """Leveled nested-net index over a set of dataset point indices."""

    dataset: Dataset
    metric: MetricHandle
    node_points: np.ndarray      # representative point index per node, farthest-first
    entry_level: np.ndarray      # highest level holding each node; [0] is l_top
    l_top: int
    l_bottom: int
    multiplicity: dict           # representative point index -> duplicate count
    children: list               # per node: {child entry level: [node ids]}
    _values: object = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_points)

    def node_value(self, node: int):
        return self.dataset.value(int(self.node_points[node]))

    def _node_values(self, nodes):
        return self.dataset.values_at(self.node_points[np.asarray(nodes, dtype=np.intp)])

    def level_members(self, level: int) -> np.ndarray:
        """Node ids present at a level (clamped to [l_bottom, l_top])."""
        level = min(max(level, self.l_bottom), self.l_top)
        return np.flatnonzero(self.entry_level >= level)


def build(points, dataset: Dataset, metric: MetricHandle) -> CoverTree:
    """Build a cover tree over the given point indices.

    Duplicate values are collapsed onto the lowest-index representative. The
    point indices may arrive in any order; the tree itself is deterministic.
    """
    metric.check_dataset(dataset)
    indices = sorted(int(i) for i in points)
    if not indices:
        raise ConfigError("cannot build a cover tree over an empty point set")

    reps: list[int] = []
    multiplicity: dict[int, int] = {}
    seen: dict = {}
    for i in indices:
        v = dataset.value(i)
        key = v.tobytes() if dataset.kind == "numeric" else v
        rep = seen.get(key)
        if rep is None:
            seen[key] = i
            reps.append(i)
            multiplicity[i] = 1
        else:
            multiplicity[rep] += 1

    m = len(reps)
    if m == 1:
        # Single-point convention: one node, l_top = l_bottom = 0.
        return CoverTree(
            dataset=dataset,
            metric=metric,
            node_points=np.asarray(reps, dtype=np.intp),
            entry_level=np.asarray([0], dtype=np.int64),
            l_top=0,
            l_bottom=0,
            multiplicity=multiplicity,
            children=[{}],
        )

    rep_arr = np.asarray(reps, dtype=np.intp)

    # Farthest-first ordering with insertion radii. nearest_sel[t] tracks, for
    # each not-yet-selected point, which selected node currently realizes its
    # closest distance; it becomes the default parent candidate.
    order = [0]
    radii: list[float] = []
    nearest_sel: list[int] = []
    remaining = np.arange(1, m, dtype=np.intp)
    closest_d = metric.dist_to_many(dataset.value(reps[0]), dataset.values_at(rep_arr[remaining]))
    closest_o = np.zeros(m - 1, dtype=np.intp)
    while remaining.size:
        t = int(np.argmax(closest_d))
        if closest_d[t] == 0.0:
            # Value-distinct but metrically indistinguishable (distance
            # underflow): fold the rest into their nearest node's multiplicity.
            for pos in range(len(remaining)):
                rep_here = int(rep_arr[order[int(closest_o[pos])]])
                multiplicity[rep_here] += multiplicity.pop(int(rep_arr[remaining[pos]]))
            break
        order.append(int(remaining[t]))
        radii.append(float(closest_d[t]))
        nearest_sel.append(int(closest_o[t]))
        remaining = np.delete(remaining, t)
        closest_d = np.delete(closest_d, t)
        closest_o = np.delete(closest_o, t)
        if remaining.size:
            d_new = metric.dist_to_many(
                dataset.value(reps[order[-1]]), dataset.values_at(rep_arr[remaining])
            )
            better = d_new < closest_d
            closest_d[better] = d_new[better]
            closest_o[better] = len(order) - 1

    m = len(order)
    if m == 1:
        return CoverTree(
            dataset=dataset,
            metric=metric,
            node_points=rep_arr[np.asarray(order, dtype=np.intp)],
            entry_level=np.asarray([0], dtype=np.int64),
            l_top=0,
            l_bottom=0,
            multiplicity=multiplicity,
            children=[{}],
        )
    entry = np.empty(m, dtype=np.int64)
    for j in range(1, m):
        entry[j] = floor_log2(radii[j - 1])
    l_bottom = int(entry[1:].min())
    l_top = int(entry[1:].max()) + 1
    entry[0] = l_top

    node_points = rep_arr[np.asarray(order, dtype=np.intp)]
    tree = CoverTree(
        dataset=dataset,
        metric=metric,
        node_points=node_points,
        entry_level=entry,
        l_top=l_top,
        l_bottom=l_bottom,
        multiplicity=multiplicity,
        children=[{} for _ in range(m)],
    )

    # Parent links: node j entering at level L needs a parent in T_{L+1}
    # within 2^(L+1). Its nearest earlier node qualifies whenever that node
    # sits high enough (the distance is the insertion radius <= 2^(L+1));
    # otherwise scan the T_{L+1} prefix, which covers every point within
    # 2^(L+1) by construction.
    for j in range(1, m):
        lvl = int(entry[j])
        parent_level = lvl + 1
        cand = nearest_sel[j - 1]
        if entry[cand] >= parent_level:
            parent = cand
        else:
            prefix_len = int(np.searchsorted(-entry, -parent_level, side="right"))
            d = metric.dist_to_many(tree.node_value(j), tree._node_values(range(prefix_len)))
            parent = int(np.argmin(d))
            if d[parent] > _pow2(parent_level):
                raise AssertionError("cover tree parent covering violated")
        tree.children[parent].setdefault(lvl, []).append(j)
    return tree


def nearest_neighbor(tree: CoverTree, query, early_stop: float | None = None):
    """Nearest stored point to the query value: (point index, distance).

    Top-down candidate descent with pruning radius d_min + 2^i; exact-tie
    minimizers resolve to the lowest point index. With early_stop set, returns
    the first candidate found at distance <= early_stop (decision queries)."""
    metric = tree.metric
    d0 = metric.dist(query, tree.node_value(0))
    best_d, best_pt = d0, int(tree.node_points[0])
    if early_stop is not None and best_d <= early_stop:
        return best_pt, best_d
    if tree.n_nodes == 1:
        return best_pt, best_d

    memo = {0: d0}
    candidates = [0]
    for i in range(tree.l_top, tree.l_bottom, -1):
        new_nodes = [c for q in candidates for c in tree.children[q].get(i - 1, ())]
        if new_nodes:
            dists = metric.dist_to_many(query, tree._node_values(new_nodes))
            for node, d in zip(new_nodes, dists):
                d = float(d)
                memo[node] = d
                pt = int(tree.node_points[node])
                if (d, pt) < (best_d, best_pt):
                    best_d, best_pt = d, pt
            if early_stop is not None and best_d <= early_stop:
                return best_pt, best_d
            candidates = candidates + new_nodes
        threshold = best_d + _pow2(i)
        candidates = [q for q in candidates if memo[q] <= threshold]
    return best_pt, best_d


def level_net(tree: CoverTree, level: int) -> np.ndarray:
    """Point indices of the net stored at a level (clamped to the tree's
    range), sorted ascending. The returned set packs at 2^level and covers
    every stored point within 2^level."""
    nodes = tree.level_members(level)
    return np.sort(tree.node_points[nodes])
