"""Command-line interface: dataset ingestion, run orchestration, and label /
stats emission.

Labels files carry one `index,role,cluster_id` line per point; stats files
are line-oriented `key=value` text. Output files are written atomically. Exit
codes: 0 success, 1 usage error, 2 data error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .approx import approx_dbscan
from .baseline import brute_force_dbscan, dataset_diagnostics, validate_rho_approx
from .core import (
    OUTLIER_ID,
    ROLE_BY_NAME,
    ROLE_NAMES,
    Clustering,
    ConfigError,
    Dataset,
    Params,
    Role,
)
from .evaluation import adjusted_mutual_information, adjusted_rand_index
from .exact import (
    assign_border_outliers,
    exact_dbscan,
    label_core_points,
    merge_core_points,
)
from .kcenter import build_neighbor_sets, radius_guided_gonzalez
from .metrics import METRIC_NAMES, make_metric
from .stream import memory_footprint, streaming_dbscan

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INVALID = 3

MODES = ("exact", "approx", "stream", "bruteforce", "validate", "diagnostics")
FORMATS = ("csv", "strings")


class DataFormatError(ValueError):
    """Malformed or empty input data."""


class UsageError(ValueError):
    """Invalid flag combination."""


@dataclass
class RunConfig:
    input: str
    mode: str
    format: str = "csv"
    metric: str = "euclidean"
    epsilon: float | None = None
    epsilon_sweep: list | None = None
    min_pts: int | None = None
    rho: float | None = None
    r_bar: float | None = None
    start: int = 0
    labels: str | None = None
    output: str | None = None
    stats: str | None = None
    diagnostics: bool = False
    preprocess: str = "gonzalez"


def _parse_csv_row(line: str, lineno: int, expected_cols: int | None):
    cells = line.split(",")
    if expected_cols is not None and len(cells) != expected_cols:
        raise DataFormatError(
            f"line {lineno}: expected {expected_cols} columns, found {len(cells)}"
        )
    try:
        return [float(c) for c in cells]
    except ValueError:
        raise DataFormatError(f"line {lineno}: malformed numeric cell") from None


def load_dataset(path: str, format: str, labels_from_last_column: bool = False):
    """Read a dataset file; returns (Dataset, ground-truth labels or None).

    csv: one point per row, uniform column count; with
    labels_from_last_column the final column is parsed as an integer class
    label. strings: one point per line, trailing newline ignored."""
    if format not in FORMATS:
        raise UsageError(f"format must be one of {FORMATS}, got {format!r}")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DataFormatError(f"{path} is empty")

    if format == "strings":
        return Dataset.from_strings(lines), None

    expected = None
    rows = []
    for i, line in enumerate(lines, start=1):
        row = _parse_csv_row(line, i, expected)
        if expected is None:
            expected = len(row)
            if labels_from_last_column and expected < 2:
                raise DataFormatError("line 1: need at least one coordinate plus a label column")
        rows.append(row)
    arr = np.asarray(rows, dtype=np.float64)
    truth = None
    if labels_from_last_column:
        truth = arr[:, -1].astype(np.int64)
        arr = arr[:, :-1]
    return Dataset.from_vectors(arr), truth


def load_ground_truth(path: str) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    labels = []
    for i, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        try:
            labels.append(int(float(line)))
        except ValueError:
            raise DataFormatError(f"line {i}: malformed label") from None
    if not labels:
        raise DataFormatError(f"{path} holds no labels")
    return np.asarray(labels, dtype=np.int64)


def load_labels_file(path: str) -> Clustering:
    """Rebuild a Clustering from a previously written labels file (border
    alternatives are not stored, so they come back unknown)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    roles = []
    ids = []
    for i, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise DataFormatError(f"line {i}: expected index,role,cluster_id")
        try:
            roles.append(ROLE_BY_NAME[parts[1]])
            ids.append(int(parts[2]))
        except (KeyError, ValueError):
            raise DataFormatError(f"line {i}: malformed labels row") from None
    if not ids:
        raise DataFormatError(f"{path} holds no labels")
    ids_arr = np.asarray(ids, dtype=np.int64)
    k = int(ids_arr.max()) + 1 if (ids_arr != OUTLIER_ID).any() else 0
    return Clustering(
        roles=np.asarray(roles, dtype=np.int8),
        cluster_ids=ids_arr,
        k=k,
        border_alternatives=None,
    )


def _atomic_write(path: str, content: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=target.name)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_labels(clustering: Clustering) -> str:
    lines = [
        f"{i},{ROLE_NAMES[Role(int(r))]},{int(c)}"
        for i, (r, c) in enumerate(zip(clustering.roles, clustering.cluster_ids))
    ]
    return "\n".join(lines) + "\n"


def format_stats(entries: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in entries.items())


def _clustering_stats(clustering: Clustering, counters, truth=None) -> dict:
    roles = clustering.roles
    stats = {
        "n": clustering.n,
        "k": clustering.k,
        "n_core": int((roles == Role.CORE).sum()),
        "n_border": int((roles == Role.BORDER).sum()),
        "n_outlier": int((roles == Role.OUTLIER).sum()),
        "distance_evals": counters.distance_evals,
        "centers": counters.centers,
        "summary_size": counters.summary_size,
        "retained": counters.retained,
    }
    for name, seconds in counters.phase_times.items():
        stats[f"time_{name}"] = f"{seconds:.6f}"
    stats["time_total"] = f"{counters.total_time:.6f}"
    if "gonzalez" in counters.phase_times and counters.total_time > 0:
        stats["gonzalez_share"] = f"{counters.phase_times['gonzalez'] / counters.total_time:.4f}"
    if truth is not None:
        stats["ari"] = f"{adjusted_rand_index(truth, clustering.cluster_ids):.6f}"
        stats["ami"] = f"{adjusted_mutual_information(truth, clustering.cluster_ids):.6f}"
    return stats


def _make_stream_source(path: str, format: str, drop_last_column: bool):
    """Zero-argument factory yielding parsed points, re-reading the file on
    every call so only one line is in memory at a time."""

    def source():
        expected = [None]

        def gen():
            with open(path, "r") as fh:
                lineno = 0
                for line in fh:
                    lineno += 1
                    line = line.rstrip("\n")
                    if line == "" and format == "csv":
                        continue
                    if format == "strings":
                        yield line
                        continue
                    row = _parse_csv_row(line, lineno, expected[0])
                    if expected[0] is None:
                        expected[0] = len(row)
                    yield np.asarray(row[:-1] if drop_last_column else row, dtype=np.float64)

        return gen()

    return source


def run(config: RunConfig) -> int:
    """Execute one configured run; returns the process exit code."""
    _check_config(config)
    metric = make_metric(config.metric)

    if config.mode == "stream":
        return _run_stream(config, metric)

    truth_from_csv = config.labels == "self"
    dataset, truth = load_dataset(config.input, config.format, truth_from_csv)
    if config.labels and not truth_from_csv and config.mode != "validate":
        truth = load_ground_truth(config.labels)
        if len(truth) != dataset.n:
            raise DataFormatError(
                f"ground truth holds {len(truth)} labels for {dataset.n} points"
            )

    if config.mode == "diagnostics":
        diag = dataset_diagnostics(dataset, metric)
        _emit_stats(config, _diag_stats(diag))
        return EXIT_OK

    if config.mode == "validate":
        clustering = load_labels_file(config.labels)
        if clustering.n != dataset.n:
            raise DataFormatError(
                f"labels file holds {clustering.n} rows for {dataset.n} points"
            )
        report = validate_rho_approx(
            dataset, metric, clustering, config.epsilon, config.min_pts, config.rho or 0.0
        )
        stats = {"n": dataset.n, "ok": str(report.ok).lower(), "violations": len(report.violations)}
        for i, v in enumerate(report.violations[:20]):
            stats[f"violation_{i}"] = f"{v.kind}:{','.join(str(p) for p in v.points)}"
        _emit_stats(config, stats)
        return EXIT_OK if report.ok else EXIT_INVALID

    if config.epsilon_sweep is not None:
        return _run_sweep(config, metric, dataset, truth)

    if config.mode == "exact":
        clustering, counters = exact_dbscan(
            dataset,
            metric,
            config.epsilon,
            config.min_pts,
            mode=config.preprocess,
            r_bar=config.r_bar,
            start=config.start,
        )
    elif config.mode == "approx":
        clustering, counters = approx_dbscan(
            dataset, metric, config.epsilon, config.min_pts, config.rho, start=config.start
        )
    else:  # bruteforce
        clustering = brute_force_dbscan(dataset, metric, config.epsilon, config.min_pts)
        counters = metric.counters

    stats = _clustering_stats(clustering, counters, truth)
    if config.diagnostics:
        stats.update(_diag_stats(dataset_diagnostics(dataset, metric, clustering)))
    if config.output:
        _atomic_write(config.output, format_labels(clustering))
    _emit_stats(config, stats)
    return EXIT_OK


def _run_stream(config: RunConfig, metric) -> int:
    truth_from_csv = config.labels == "self"
    source = _make_stream_source(config.input, config.format, truth_from_csv)
    clustering, state, counters = streaming_dbscan(
        source, metric, config.epsilon, config.min_pts, config.rho
    )
    truth = None
    if truth_from_csv:
        _, truth = load_dataset(config.input, config.format, True)
    elif config.labels:
        truth = load_ground_truth(config.labels)
    stats = _clustering_stats(clustering, counters, truth)
    e, m, s, ratio = memory_footprint(state)
    stats["memory_ratio"] = f"{ratio:.6f}"
    if config.output:
        _atomic_write(config.output, format_labels(clustering))
    _emit_stats(config, stats)
    return EXIT_OK


def _run_sweep(config: RunConfig, metric, dataset, truth) -> int:
    """One center-selection pass reused across every epsilon in the sweep."""
    sweep = sorted(config.epsilon_sweep)
    r_bar = config.r_bar if config.r_bar is not None else min(sweep) / 2.0
    for eps in sweep:
        Params(epsilon=eps, min_pts=config.min_pts, r_bar=r_bar).exact_radius()
    counters = metric.counters
    with counters.phase("gonzalez"):
        cover = radius_guided_gonzalez(dataset, metric, r_bar, start=config.start)
    stats: dict = {"n": dataset.n, "sweep": ",".join(repr(e) for e in sweep)}
    for j, eps in enumerate(sweep):
        with counters.phase(f"sweep{j}_neighbor_sets"):
            bound = build_neighbor_sets(cover, eps, slack=2)
        with counters.phase(f"sweep{j}_label_cores"):
            flags = label_core_points(bound, metric, config.min_pts)
        with counters.phase(f"sweep{j}_merge_cores"):
            merge = merge_core_points(bound, flags, metric)
        with counters.phase(f"sweep{j}_assign_rest"):
            clustering = assign_border_outliers(bound, merge, metric, flags)
        stats[f"eps{j}"] = repr(eps)
        stats[f"eps{j}_k"] = clustering.k
        stats[f"eps{j}_n_core"] = int((clustering.roles == Role.CORE).sum())
        if truth is not None:
            stats[f"eps{j}_ari"] = f"{adjusted_rand_index(truth, clustering.cluster_ids):.6f}"
        if config.output:
            out = Path(config.output)
            _atomic_write(str(out.with_name(out.name + f".eps{j}")), format_labels(clustering))
    stats["distance_evals"] = counters.distance_evals
    stats["centers"] = counters.centers
    for name, seconds in counters.phase_times.items():
        stats[f"time_{name}"] = f"{seconds:.6f}"
    stats["time_total"] = f"{counters.total_time:.6f}"
    stats["gonzalez_share"] = (
        f"{counters.phase_times['gonzalez'] / counters.total_time:.4f}"
        if counters.total_time > 0
        else "1.0"
    )
    _emit_stats(config, stats)
    return EXIT_OK


def _diag_stats(diag) -> dict:
    stats = {
        "delta_max": repr(diag.delta_max),
        "delta_min": repr(diag.delta_min),
        "aspect_ratio": repr(diag.aspect_ratio),
    }
    if diag.outlier_count is not None:
        stats["outliers"] = diag.outlier_count
    return stats


def _emit_stats(config: RunConfig, stats: dict) -> None:
    content = format_stats(stats)
    if config.stats:
        _atomic_write(config.stats, content)
    else:
        sys.stdout.write(content)


def _check_config(config: RunConfig) -> None:
    if config.mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}")
    if config.format not in FORMATS:
        raise UsageError(f"format must be one of {FORMATS}")
    if (config.metric == "edit") != (config.format == "strings"):
        raise UsageError("metric 'edit' pairs with format 'strings', the others with 'csv'")
    needs_params = config.mode in ("exact", "approx", "stream", "bruteforce", "validate")
    if needs_params:
        if config.min_pts is None:
            raise UsageError(f"mode {config.mode} requires --minpts")
        if config.epsilon is None and config.epsilon_sweep is None:
            raise UsageError(f"mode {config.mode} requires --epsilon or --epsilon-sweep")
    if config.epsilon_sweep is not None:
        if config.mode != "exact":
            raise UsageError("--epsilon-sweep is only supported with mode exact")
        if config.epsilon is not None:
            raise UsageError("give either --epsilon or --epsilon-sweep, not both")
    if config.mode in ("approx", "stream") and config.rho is None:
        raise UsageError(f"mode {config.mode} requires --rho")
    if config.mode == "validate" and not config.labels:
        raise UsageError("mode validate requires --labels pointing at a prior labels file")
    if config.mode == "stream" and config.preprocess != "gonzalez":
        raise UsageError("--preprocess applies to mode exact only")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="metric-dbscan",
        description="Metric-space DBSCAN: exact, approximate, and streaming runs "
        "with a brute-force oracle, validators, and instrumented stats.",
    )
    parser.add_argument("--input", required=True, help="input data file")
    parser.add_argument("--format", default="csv", choices=FORMATS)
    parser.add_argument("--metric", default="euclidean", choices=METRIC_NAMES)
    parser.add_argument("--mode", required=True, choices=MODES)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--epsilon-sweep", help="comma-separated epsilon values")
    parser.add_argument("--minpts", type=int, dest="min_pts")
    parser.add_argument("--rho", type=float)
    parser.add_argument("--rbar", type=float, dest="r_bar")
    parser.add_argument("--start", type=int, default=0, help="center-selection start index")
    parser.add_argument(
        "--labels",
        help="ground truth for scoring ('self' = last csv column); "
        "in validate mode, a labels file from a prior run",
    )
    parser.add_argument("--output", help="labels output path")
    parser.add_argument("--stats", help="stats output path (default: stdout)")
    parser.add_argument("--diagnostics", action="store_true", help="add O(n^2) dataset diagnostics")
    parser.add_argument("--preprocess", default="gonzalez", choices=("gonzalez", "covertree_net"))
    return parser


def parse_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    sweep = None
    if args.epsilon_sweep:
        try:
            sweep = [float(v) for v in args.epsilon_sweep.split(",") if v != ""]
        except ValueError:
            raise UsageError(f"malformed --epsilon-sweep {args.epsilon_sweep!r}") from None
        if not sweep:
            raise UsageError("--epsilon-sweep needs at least one value")
    return RunConfig(
        input=args.input,
        mode=args.mode,
        format=args.format,
        metric=args.metric,
        epsilon=args.epsilon,
        epsilon_sweep=sweep,
        min_pts=args.min_pts,
        rho=args.rho,
        r_bar=args.r_bar,
        start=args.start,
        labels=args.labels,
        output=args.output,
        stats=args.stats,
        diagnostics=args.diagnostics,
        preprocess=args.preprocess,
    )


def main(argv=None) -> int:
    try:
        config = parse_args(argv if argv is not None else sys.argv[1:])
        return run(config)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
