"""Metric-space DBSCAN toolkit: exact, relaxed (rho-approximate), and
streaming clustering over arbitrary distance functions, with a brute-force
oracle, solution validators, and clustering-quality scores."""

from .approx import Summary, approx_dbscan, build_core_summary, label_points_approx, merge_summary
from .baseline import (
    Diagnostics,
    ValidationReport,
    Violation,
    brute_force_dbscan,
    check_sandwich,
    dataset_diagnostics,
    validate_rho_approx,
)
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
from .covertree import CoverTree, build, level_net, nearest_neighbor
from .evaluation import adjusted_mutual_information, adjusted_rand_index
from .exact import CoreMerge, cover_from_net, exact_dbscan
from .kcenter import CoverStructure, build_neighbor_sets, radius_guided_gonzalez
from .metrics import MetricHandle, edit_distance, euclidean, make_metric, manhattan
from .stream import StreamError, StreamState, memory_footprint, streaming_dbscan

__all__ = [
    "OUTLIER_ID",
    "Clustering",
    "ConfigError",
    "CoreMerge",
    "CoverStructure",
    "CoverTree",
    "Dataset",
    "Diagnostics",
    "DisjointSet",
    "MetricHandle",
    "Params",
    "Role",
    "RunCounters",
    "StreamError",
    "StreamState",
    "Summary",
    "ValidationReport",
    "Violation",
    "adjusted_mutual_information",
    "adjusted_rand_index",
    "approx_dbscan",
    "brute_force_dbscan",
    "build",
    "build_core_summary",
    "build_neighbor_sets",
    "canonicalize",
    "check_sandwich",
    "cover_from_net",
    "dataset_diagnostics",
    "edit_distance",
    "empty_clustering",
    "euclidean",
    "exact_dbscan",
    "label_points_approx",
    "level_net",
    "make_metric",
    "manhattan",
    "memory_footprint",
    "merge_summary",
    "nearest_neighbor",
    "radius_guided_gonzalez",
    "streaming_dbscan",
    "validate_rho_approx",
]
