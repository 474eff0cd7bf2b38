"""Chance-adjusted partition agreement scores: Adjusted Rand Index and
Adjusted Mutual Information.

Outliers (label -1) count as one class of their own in both scores. AMI uses
the exact hypergeometric expected-mutual-information model, natural
logarithms, and arithmetic-mean normalization. Degenerate denominators score
1 for identical partitions and 0 otherwise.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

_DEGENERATE_TOL = 1e-12


def _contingency(labels_a, labels_b):
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if len(a) != len(b):
        raise ValueError(f"label length mismatch: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValueError("scores need at least one point")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _identical_partition(table: np.ndarray) -> bool:
    return bool(
        ((table > 0).sum(axis=0) <= 1).all() and ((table > 0).sum(axis=1) <= 1).all()
    )


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Pair-counting agreement adjusted for chance; 1 for identical partitions."""
    table = _contingency(labels_a, labels_b)
    n = int(table.sum())

    def comb2(x):
        return x * (x - 1) // 2

    index = int(comb2(table).sum())
    sum_a = int(comb2(table.sum(axis=1)).sum())
    sum_b = int(comb2(table.sum(axis=0)).sum())
    total = comb2(n)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2.0
    denom = max_index - expected
    if abs(denom) < _DEGENERATE_TOL:
        return 1.0 if _identical_partition(table) else 0.0
    return float((index - expected) / denom)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def _mutual_information(table: np.ndarray, n: int) -> float:
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    i, j = np.nonzero(table)
    nij = table[i, j].astype(np.float64)
    return float((nij / n * np.log(n * nij / (a[i] * b[j]))).sum())


def _expected_mutual_information(a: np.ndarray, b: np.ndarray, n: int) -> float:
    """Exact hypergeometric expectation of the mutual information between two
    random partitions with the given class sizes."""
    total = 0.0
    log_n = np.log(n)
    gln_n = gammaln(n + 1)
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            term = nij / n * (log_n + np.log(nij) - np.log(float(ai) * bj))
            log_weight = (
                gammaln(ai + 1)
                + gammaln(bj + 1)
                + gammaln(n - ai + 1)
                + gammaln(n - bj + 1)
                - gln_n
                - gammaln(nij + 1)
                - gammaln(ai - nij + 1)
                - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            total += float((term * np.exp(log_weight)).sum())
    return total


def adjusted_mutual_information(labels_a, labels_b) -> float:
    """Mutual information adjusted for chance with the hypergeometric model,
    normalized by the mean of the two entropies."""
    table = _contingency(labels_a, labels_b)
    n = int(table.sum())
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    mi = _mutual_information(table, n)
    emi = _expected_mutual_information(a, b, n)
    h_mean = (_entropy(a, n) + _entropy(b, n)) / 2.0
    denom = h_mean - emi
    if abs(denom) < _DEGENERATE_TOL:
        return 1.0 if _identical_partition(table) else 0.0
    return float((mi - emi) / denom)
