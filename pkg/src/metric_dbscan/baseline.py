"""Ground-truth oracle and solution validators.

brute_force_dbscan is the reference implementation every faster algorithm is
checked against: exhaustive neighborhood counts, breadth-first growth of the
core graph. validate_rho_approx checks an arbitrary clustering against the
relaxed-solution contract (core uniqueness, single-step maximality,
within-cluster connectivity at the relaxed radius, border attachment), and
check_sandwich verifies that a relaxed solution sits between the exact
solutions at epsilon and (1+rho)*epsilon on core points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    NUMERIC,
    OUTLIER_ID,
    Clustering,
    Dataset,
    DisjointSet,
    Role,
    canonicalize,
)
from .metrics import MetricHandle


@dataclass
class Violation:
    kind: str  # core-multi-cluster | maximality-step | connectivity | role-mismatch
    points: tuple
    distance: float | None = None


@dataclass
class ValidationReport:
    ok: bool
    violations: list

    @classmethod
    def from_violations(cls, violations) -> "ValidationReport":
        violations = list(violations)
        return cls(ok=not violations, violations=violations)


@dataclass
class Diagnostics:
    delta_max: float
    delta_min: float
    aspect_ratio: float
    outlier_count: int | None = None


def brute_force_dbscan(dataset: Dataset, metric: MetricHandle, epsilon: float, min_pts: int) -> Clustering:
    """Reference DBSCAN: Theta(n^2) exhaustive neighborhoods.

    Clusters are the connected components of the epsilon-graph restricted to
    core points; borders join their nearest core's cluster (ties to the
    lowest cluster id, other reachable clusters kept as alternatives)."""
    metric.check_dataset(dataset)
    if dataset.n == 0:
        raise ValueError("brute-force DBSCAN needs a nonempty dataset")
    n = dataset.n
    dist = metric.pairwise(dataset.all_values())
    within = dist <= epsilon
    core = within.sum(axis=1) >= min_pts

    ids = np.full(n, OUTLIER_ID, dtype=np.int64)
    roles = np.full(n, Role.OUTLIER, dtype=np.int8)
    k = 0
    for p in range(n):
        if not core[p] or ids[p] != OUTLIER_ID:
            continue
        ids[p] = k
        queue = [p]
        while queue:
            q = queue.pop()
            for r in np.flatnonzero(within[q] & core):
                if ids[r] == OUTLIER_ID:
                    ids[r] = k
                    queue.append(int(r))
        k += 1
    roles[core] = Role.CORE

    alternatives: dict = {}
    for p in np.flatnonzero(~core):
        neighbors = np.flatnonzero(within[p] & core)
        if len(neighbors) == 0:
            continue
        d = dist[p, neighbors]
        clusters = ids[neighbors]
        chosen = int(clusters[d == d.min()].min())
        ids[p] = chosen
        roles[p] = Role.BORDER
        others = sorted(set(int(x) for x in clusters) - {chosen})
        if others:
            alternatives[p] = tuple(others)

    return canonicalize(
        Clustering(roles=roles, cluster_ids=ids, k=k, border_alternatives=alternatives)
    )


def validate_rho_approx(
    dataset: Dataset,
    metric: MetricHandle,
    clustering: Clustering,
    epsilon: float,
    min_pts: int,
    rho: float,
) -> ValidationReport:
    """Check a clustering against the relaxed-solution contract.

    Role soundness: points flagged core must be true core points, points
    flagged outlier must be true outliers. Core uniqueness: every true core
    carries exactly one cluster id. Maximality, single step: every point
    within epsilon of a true core shares (one of) its labels. Connectivity:
    each cluster's true cores are one component under (1+rho)*epsilon, and
    every clustered non-core lies within (rho/2+1)*epsilon of a true core of
    each cluster it is labeled with — the radius the relaxed labeling rule
    itself uses, so valid relaxed outputs pass. When border_alternatives is
    None (labels reloaded from a file) the alternative-dependent checks fall
    back to the primary id only.
    """
    metric.check_dataset(dataset)
    n = dataset.n
    if clustering.n != n:
        raise ValueError(f"clustering has {clustering.n} points, dataset {n}")
    violations: list = []
    dist = metric.pairwise(dataset.all_values())
    within = dist <= epsilon
    true_core = within.sum(axis=1) >= min_pts
    true_border = np.zeros(n, dtype=bool)
    if true_core.any():
        true_border = ~true_core & (within[:, true_core].any(axis=1))

    ids = clustering.cluster_ids
    roles = clustering.roles
    alts_known = clustering.border_alternatives is not None

    # Role soundness and internal id/role consistency.
    for p in range(n):
        role = roles[p]
        if (role == Role.OUTLIER) != (ids[p] == OUTLIER_ID):
            violations.append(Violation("role-mismatch", (p,)))
        elif role == Role.CORE and not true_core[p]:
            violations.append(Violation("role-mismatch", (p,)))
        elif role == Role.OUTLIER and (true_core[p] or true_border[p]):
            violations.append(Violation("role-mismatch", (p,)))

    # Core uniqueness: exactly one cluster per true core.
    for p in np.flatnonzero(true_core):
        p = int(p)
        if ids[p] == OUTLIER_ID:
            violations.append(Violation("core-multi-cluster", (p,)))
        elif alts_known and clustering.border_alternatives.get(p):
            violations.append(Violation("core-multi-cluster", (p,)))

    # Maximality, single step: neighbors of a true core share its cluster.
    for q in np.flatnonzero(true_core):
        q = int(q)
        cq = int(ids[q])
        if cq == OUTLIER_ID:
            continue  # already reported
        for p in np.flatnonzero(within[q]):
            p = int(p)
            if p == q:
                continue
            if cq in clustering.labels_for(p):
                continue
            if not alts_known and not true_core[p] and ids[p] != OUTLIER_ID:
                continue  # alternatives unknown; accept any cluster label
            violations.append(Violation("maximality-step", (q, p), float(dist[q, p])))

    # Connectivity: per cluster, true cores form one relaxed component ...
    relaxed = (1.0 + rho) * epsilon
    for cid in np.unique(ids[ids != OUTLIER_ID]):
        members = np.flatnonzero((ids == cid) & true_core)
        if len(members) < 2:
            continue
        comp = DisjointSet(len(members))
        sub = dist[np.ix_(members, members)]
        for i in range(len(members)):
            for j in np.flatnonzero(sub[i, i + 1 :] <= relaxed) + i + 1:
                comp.union(i, int(j))
        if comp.n_components > 1:
            root0 = comp.find(0)
            other = [i for i in range(len(members)) if comp.find(i) != root0]
            cross = sub[0, other]
            j = other[int(np.argmin(cross))]
            violations.append(
                Violation("connectivity", (int(members[0]), int(members[j])), float(sub[0, j]))
            )

    # ... and every clustered non-core is attached within (rho/2+1)*epsilon
    # to a true core of each cluster it is labeled with.
    attach = (rho / 2.0 + 1.0) * epsilon
    for p in range(n):
        if true_core[p] or ids[p] == OUTLIER_ID:
            continue
        for cid in clustering.labels_for(p):
            anchors = np.flatnonzero((ids == cid) & true_core)
            if len(anchors) == 0:
                violations.append(Violation("connectivity", (p,), None))
                continue
            d = dist[p, anchors].min()
            if d > attach:
                violations.append(Violation("connectivity", (p,), float(d)))

    return ValidationReport.from_violations(violations)


def check_sandwich(
    exact_eps: Clustering,
    approx: Clustering,
    exact_bigeps: Clustering,
) -> ValidationReport:
    """Verify the sandwich property on the points that are core at epsilon:
    together in exact(eps) implies together in the relaxed solution, and
    together in the relaxed solution implies together in exact((1+rho)eps)."""
    if not (exact_eps.n == approx.n == exact_bigeps.n):
        raise ValueError("sandwich check needs clusterings over the same dataset")
    cores = np.flatnonzero(exact_eps.roles == Role.CORE)
    violations: list = []

    def refines(fine_ids, coarse_ids, kind):
        witness: dict = {}
        for p in cores:
            p = int(p)
            key = int(fine_ids[p])
            seen = witness.get(key)
            if seen is None:
                witness[key] = p
            elif coarse_ids[p] != coarse_ids[seen]:
                violations.append(Violation(kind, (seen, p)))

    refines(exact_eps.cluster_ids, approx.cluster_ids, "maximality-step")
    refines(approx.cluster_ids, exact_bigeps.cluster_ids, "connectivity")
    return ValidationReport.from_violations(violations)


def dataset_diagnostics(dataset: Dataset, metric: MetricHandle, clustering: Clustering | None = None) -> Diagnostics:
    """Exact extreme pairwise distances over the distinct points, at Theta(n^2)
    metric cost; optionally reports the outlier count of a clustering."""
    metric.check_dataset(dataset)
    seen: dict = {}
    for i in range(dataset.n):
        v = dataset.value(i)
        key = v.tobytes() if dataset.kind == NUMERIC else v
        seen.setdefault(key, i)
    distinct = sorted(seen.values())
    if len(distinct) < 2:
        raise ValueError("diagnostics need at least two distinct points")
    dist = metric.pairwise(dataset.values_at(distinct))
    offdiag = dist[np.triu_indices(len(distinct), k=1)]
    delta_max = float(offdiag.max())
    delta_min = float(offdiag.min())
    z = None
    if clustering is not None:
        z = int((clustering.cluster_ids == OUTLIER_ID).sum())
    return Diagnostics(
        delta_max=delta_max,
        delta_min=delta_min,
        aspect_ratio=delta_max / delta_min,
        outlier_count=z,
    )
