"""Three-pass streaming relaxed DBSCAN with memory independent of the stream
length.

Pass 1 grows a first-fit net of radius rho*epsilon/2 (the retained centers),
counts stream points falling in each center's epsilon-ball, and retains in a
candidate pool the points assigned to a center that has not yet proven dense.
Pass 2 recounts the candidates' epsilon-balls exactly, which also rescues
centers whose pass-1 tally missed points that arrived before their creation
(every such center is its own candidate at distance zero). The summary is
merged offline, and pass 3 labels every stream point against it. Retained
state is exactly the centers plus the candidate pool; the summary is a subset
of those.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    NUMERIC,
    OUTLIER_ID,
    Clustering,
    ConfigError,
    DisjointSet,
    Params,
    Role,
    canonicalize,
)
from .metrics import MetricHandle


class StreamError(RuntimeError):
    """A pass over the stream ended early or out of sync with pass 1."""


class _Bank:
    """Append-only value store with a cached matrix view for batch distances."""

    def __init__(self, kind: str, items=None):
        self.kind = kind
        self.items = list(items) if items is not None else []
        self._cache = None

    def add(self, value) -> None:
        self.items.append(value)
        self._cache = None

    def __len__(self) -> int:
        return len(self.items)

    def values(self):
        if self.kind == NUMERIC:
            if self._cache is None or len(self._cache) != len(self.items):
                self._cache = (
                    np.asarray(self.items, dtype=np.float64)
                    if self.items
                    else np.empty((0, 1), dtype=np.float64)
                )
            return self._cache
        return self.items


def _ingest(raw, kind):
    if kind == NUMERIC:
        arr = np.atleast_1d(np.asarray(raw, dtype=np.float64))
        return arr, arr.tobytes()
    s = str(raw)
    return s, s


@dataclass
class StreamState:
    """Retained state of a streaming run: centers, candidate pool, summary."""

    epsilon: float
    min_pts: int
    rho: float
    r_bar: float
    centers: list
    center_eps_counts: np.ndarray
    center_is_core: np.ndarray
    candidates: dict
    summary_values: list
    summary_owner: np.ndarray
    summary_cluster: np.ndarray | None
    pass_index: int
    n_seen: int

    @property
    def n_centers(self) -> int:
        return len(self.centers)

    @property
    def n_candidates(self) -> int:
        return sum(len(bucket) for bucket in self.candidates.values())

    @property
    def summary_size(self) -> int:
        return len(self.summary_values)


def memory_footprint(state: StreamState):
    """(|centers|, |candidates|, |summary|, retained fraction of the stream)."""
    if state.n_seen == 0:
        raise ConfigError("memory footprint undefined before any point was streamed")
    e, m, s = state.n_centers, state.n_candidates, state.summary_size
    return e, m, s, (e + m) / state.n_seen


def streaming_dbscan(source, metric: MetricHandle, epsilon: float, min_pts: int, rho: float):
    """Cluster a re-playable stream; returns (Clustering, StreamState, RunCounters).

    source is a zero-argument callable returning a fresh iterator over the
    point values; it is consumed exactly three times. Requires 0 < rho <= 2.
    """
    if not callable(source):
        raise ConfigError("source must be a zero-argument callable returning an iterable")
    if not rho > 0:
        raise ConfigError(f"streaming mode requires rho > 0, got {rho}")
    params = Params(epsilon=epsilon, min_pts=min_pts, rho=rho)
    r_bar = params.approx_radius()
    counters = metric.counters
    kind = metric.compatible_kind

    centers = _Bank(kind)
    center_keys: list = []
    eps_counts = np.zeros(0, dtype=np.int64)
    is_core = np.zeros(0, dtype=bool)
    candidates: dict = {}

    # Pass 1: grow the net, count epsilon-balls, retain density candidates.
    n_seen = 0
    with counters.phase("pass1"):
        for raw in source():
            p, key = _ingest(raw, kind)
            n_seen += 1
            row = metric.dist_to_many(p, centers.values())
            hit = row <= r_bar
            if hit.any():
                c = int(np.argmax(hit))
            else:
                c = len(centers)
                centers.add(p)
                center_keys.append(key)
                eps_counts = np.append(eps_counts, 0)
                is_core = np.append(is_core, False)
                row = np.append(row, 0.0)
            within = row <= epsilon
            eps_counts[within] += 1
            for e in np.flatnonzero(within & ~is_core):
                if eps_counts[e] >= min_pts:
                    is_core[e] = True
                    candidates.pop(int(e), None)
            if not is_core[c]:
                bucket = candidates.setdefault(c, {})
                if key not in bucket:
                    # Cannot trigger on correct logic: the candidates of one
                    # center each feed its epsilon count, so the center turns
                    # core before a MinPts-th distinct value could land here.
                    if len(bucket) >= min_pts - 1 and min_pts > 1:
                        raise StreamError(
                            "internal invariant broken: one center retained MinPts candidates"
                        )
                    bucket[key] = p
    if n_seen == 0:
        raise StreamError("pass 1 saw an empty stream")

    # Pass 2: exact counts for the retained candidates; centers first, then
    # the surviving members of still-sparse centers, mirroring the offline
    # summary construction.
    entries = [
        (owner, key, value)
        for owner in sorted(candidates)
        for key, value in candidates[owner].items()
    ]
    cand_bank = _Bank(kind, [value for _, _, value in entries])
    counts2 = np.zeros(len(entries), dtype=np.int64)
    with counters.phase("pass2"):
        n2 = 0
        for raw in source():
            p, _ = _ingest(raw, kind)
            n2 += 1
            if entries:
                d = metric.dist_to_many(p, cand_bank.values())
                counts2 += d <= epsilon
        if n2 != n_seen:
            raise StreamError(f"pass 2 yielded {n2} points but pass 1 saw {n_seen}")
        for i, (owner, key, _) in enumerate(entries):
            if key == center_keys[owner] and counts2[i] >= min_pts:
                is_core[owner] = True
        summary_values: list = []
        summary_owner: list = []
        member_entries: dict = {}
        for i, (owner, key, value) in enumerate(entries):
            if key != center_keys[owner] and counts2[i] >= min_pts and not is_core[owner]:
                member_entries.setdefault(owner, []).append(value)
        for e in range(len(centers)):
            if is_core[e]:
                summary_values.append(centers.items[e])
                summary_owner.append(e)
            else:
                for value in member_entries.get(e, ()):
                    summary_values.append(value)
                    summary_owner.append(e)
    summary_owner = np.asarray(summary_owner, dtype=np.intp)
    summary_bank = _Bank(kind, summary_values)

    # Offline merge at (1+rho)*epsilon, confined to neighbor centers.
    with counters.phase("merge"):
        m = len(centers)
        center_matrix = metric.pairwise(centers.values())
        threshold_centers = 4.0 * r_bar + epsilon
        neighbor_sets = [np.flatnonzero(center_matrix[j] <= threshold_centers) for j in range(m)]
        positions_by_owner = [np.flatnonzero(summary_owner == e) for e in range(m)]
        merge_threshold = (1.0 + rho) * epsilon
        components = DisjointSet(len(summary_values))
        for pos in range(len(summary_values)):
            parts = [positions_by_owner[int(e)] for e in neighbor_sets[int(summary_owner[pos])]]
            cand = np.concatenate(parts) if parts else np.empty(0, dtype=np.intp)
            cand = cand[cand > pos]
            if len(cand) == 0:
                continue
            vals = (
                summary_bank.values()[cand]
                if kind == NUMERIC
                else [summary_values[int(i)] for i in cand]
            )
            d = metric.dist_to_many(summary_values[pos], vals)
            for other in cand[d <= merge_threshold]:
                components.union(pos, int(other))
        summary_cluster = np.full(len(summary_values), OUTLIER_ID, dtype=np.int64)
        root_to_id: dict = {}
        for pos in range(len(summary_values)):
            root = components.find(pos)
            if root not in root_to_id:
                root_to_id[root] = len(root_to_id)
            summary_cluster[pos] = root_to_id[root]

    # Pass 3: label each stream point against the merged summary.
    summary_index: dict = {}
    for pos, value in enumerate(summary_values):
        _, key = _ingest(value, kind)
        summary_index.setdefault(key, pos)
    center_summary_pos = np.full(m, -1, dtype=np.intp)
    for pos, owner in enumerate(summary_owner):
        _, key = _ingest(summary_values[pos], kind)
        if key == center_keys[int(owner)]:
            center_summary_pos[int(owner)] = pos
    label_threshold = (rho / 2.0 + 1.0) * epsilon
    ids: list = []
    roles: list = []
    alternatives: dict = {}
    candidate_cache: dict = {}
    with counters.phase("pass3"):
        n3 = 0
        for raw in source():
            p, key = _ingest(raw, kind)
            i = n3
            n3 += 1
            row = metric.dist_to_many(p, centers.values())
            hit = row <= r_bar
            if not hit.any():
                raise StreamError("pass 3 saw a point outside every center ball; "
                                  "the source did not replay pass 1 faithfully")
            c = int(np.argmax(hit))
            pos = summary_index.get(key, -1)
            if pos >= 0:
                ids.append(int(summary_cluster[pos]))
                roles.append(Role.CORE)
                continue
            if is_core[c]:
                ids.append(int(summary_cluster[center_summary_pos[c]]))
                roles.append(Role.BORDER)
                continue
            cand = candidate_cache.get(c)
            if cand is None:
                parts = [positions_by_owner[int(e)] for e in neighbor_sets[c]]
                cand = np.concatenate(parts) if parts else np.empty(0, dtype=np.intp)
                candidate_cache[c] = cand
            if len(cand):
                vals = (
                    summary_bank.values()[cand]
                    if kind == NUMERIC
                    else [summary_values[int(v)] for v in cand]
                )
                d = metric.dist_to_many(p, vals)
                within = d <= label_threshold
            else:
                within = np.zeros(0, dtype=bool)
            if within.any():
                d_within = d[within]
                clusters_within = summary_cluster[cand[within]]
                chosen = int(clusters_within[d_within == d_within.min()].min())
                ids.append(chosen)
                roles.append(Role.BORDER)
                others = sorted(set(int(x) for x in clusters_within) - {chosen})
                if others:
                    alternatives[i] = tuple(others)
            else:
                ids.append(OUTLIER_ID)
                roles.append(Role.OUTLIER)
        if n3 != n_seen:
            raise StreamError(f"pass 3 yielded {n3} points but pass 1 saw {n_seen}")

    state = StreamState(
        epsilon=epsilon,
        min_pts=min_pts,
        rho=rho,
        r_bar=r_bar,
        centers=centers.items,
        center_eps_counts=eps_counts,
        center_is_core=is_core,
        candidates=candidates,
        summary_values=summary_values,
        summary_owner=summary_owner,
        summary_cluster=summary_cluster,
        pass_index=3,
        n_seen=n_seen,
    )
    counters.centers = state.n_centers
    counters.summary_size = state.summary_size
    counters.retained = state.n_centers + state.n_candidates
    clustering = canonicalize(
        Clustering(
            roles=np.asarray(roles, dtype=np.int8),
            cluster_ids=np.asarray(ids, dtype=np.int64),
            k=len(root_to_id),
            border_alternatives=alternatives,
        )
    )
    return clustering, state, counters
