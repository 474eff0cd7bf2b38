import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import fresh_metric, numeric_dataset, partitions_equal
from metric_dbscan import (
    ConfigError,
    Role,
    approx_dbscan,
    brute_force_dbscan,
    build_neighbor_sets,
    check_sandwich,
    exact_dbscan,
    radius_guided_gonzalez,
    validate_rho_approx,
)
from metric_dbscan.approx import build_core_summary, label_points_approx, merge_summary

points_strategy = st.lists(
    st.tuples(st.floats(-20, 20), st.floats(-20, 20)),
    min_size=1,
    max_size=35,
)


def prepared(values, epsilon, rho):
    ds = numeric_dataset(values)
    metric = fresh_metric()
    cover = radius_guided_gonzalez(ds, metric, rho * epsilon / 2.0)
    return build_neighbor_sets(cover, epsilon, slack=4), ds, metric


class TestBuildCoreSummary:
    def test_core_center_contributes_itself_only(self):
        cover, ds, metric = prepared([0.0, 0.2, 0.4, 10.0], 2.0, 1.0)
        summary, flags = build_core_summary(cover, metric, min_pts=3)
        # center 0 covers {0,0.2,0.4}: dense, so only the center enters
        first_center_members = summary.members[summary.owner_center == 0]
        assert list(first_center_members) == [int(cover.centers[0])]

    def test_non_core_center_contributes_its_cores(self):
        # center at 4.0 covers {4.0, 4.4}: sparse for min_pts=3, but 4.4 is
        # core thanks to the dense group across the boundary
        pts = [0.0, 3.4, 3.7, 4.4, 4.0, 9.9]
        cover, ds, metric = prepared(pts, epsilon=1.0, rho=1.0)
        summary, flags = build_core_summary(cover, metric, min_pts=3)
        by_value = {float(ds.value(int(m))[0]) for m in summary.members}
        assert 4.4 in by_value or 4.0 in by_value

    def test_no_cores_means_empty_summary(self):
        cover, _, metric = prepared([0.0, 10.0, 20.0], 2.0, 1.0)
        summary, flags = build_core_summary(cover, metric, min_pts=2)
        assert summary.size == 0
        assert not flags.any()

    def test_summary_members_are_core(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(0, 1.5, size=(150, 2))
        cover, _, metric = prepared(pts, epsilon=0.8, rho=0.5)
        summary, flags = build_core_summary(cover, metric, min_pts=5)
        assert flags[summary.members].all()

    def test_core_flags_match_oracle(self):
        rng = np.random.default_rng(3)
        pts = np.vstack([rng.normal(0, 1, size=(80, 2)), rng.uniform(-6, 6, size=(8, 2))])
        ds = numeric_dataset(pts)
        for rho in (0.5, 1.0, 2.0):
            cover, _, metric = prepared(pts, epsilon=0.9, rho=rho)
            _, flags = build_core_summary(cover, metric, min_pts=4)
            oracle = brute_force_dbscan(ds, fresh_metric(), 0.9, 4)
            assert np.array_equal(flags, np.asarray(oracle.roles) == Role.CORE)

    def test_per_center_budget(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(0, 2, size=(200, 2))
        min_pts = 5
        for rho in (0.5, 1.0, 2.0):
            cover, _, metric = prepared(pts, epsilon=0.7, rho=rho)
            summary, _ = build_core_summary(cover, metric, min_pts=min_pts)
            for e in range(cover.n_centers):
                assert len(summary.positions_by_center[e]) <= min_pts

    def test_rejects_rho_above_two(self):
        ds = numeric_dataset([0.0, 1.0])
        metric = fresh_metric()
        cover = radius_guided_gonzalez(ds, metric, 1.5)
        cover = build_neighbor_sets(cover, epsilon=1.0, slack=4)
        with pytest.raises(ConfigError):
            build_core_summary(cover, metric, min_pts=1)

    def test_rejects_slack_two(self):
        ds = numeric_dataset([0.0, 1.0])
        metric = fresh_metric()
        cover = radius_guided_gonzalez(ds, metric, 0.5)
        cover = build_neighbor_sets(cover, epsilon=1.0, slack=2)
        with pytest.raises(ConfigError):
            build_core_summary(cover, metric, min_pts=1)

    def test_representative_within_r_bar(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(0, 1.5, size=(120, 2))
        epsilon, rho = 0.8, 1.0
        cover, ds, metric = prepared(pts, epsilon, rho)
        summary, flags = build_core_summary(cover, metric, min_pts=4)
        in_summary = set(int(m) for m in summary.members)
        values = ds.all_values()
        for q in np.flatnonzero(flags):
            rep = int(summary.representative[q])
            assert rep in in_summary
            assert np.linalg.norm(values[rep] - values[q]) <= cover.r_bar or rep == q


class TestMergeSummary:
    def test_single_member_single_cluster(self):
        cover, _, metric = prepared([0.0, 0.1, 0.2], 2.0, 1.0)
        summary, _ = build_core_summary(cover, metric, min_pts=3)
        summary = merge_summary(summary, cover, metric, rho=1.0)
        assert summary.size == 1
        assert list(summary.cluster_of) == [0]

    def test_threshold_is_inclusive(self):
        # two dense triples; summary points at exactly (1+rho)*eps = 4.0 apart
        pts = [0.0, 0.0, 0.0, 4.0, 4.0, 4.0]
        cover, _, metric = prepared(pts, epsilon=2.0, rho=1.0)
        summary, _ = build_core_summary(cover, metric, min_pts=3)
        summary = merge_summary(summary, cover, metric, rho=1.0)
        assert len(set(summary.cluster_of)) == 1

    def test_just_beyond_threshold_splits(self):
        pts = [0.0, 0.0, 0.0, 4.04, 4.04, 4.04]
        cover, _, metric = prepared(pts, epsilon=2.0, rho=1.0)
        summary, _ = build_core_summary(cover, metric, min_pts=3)
        summary = merge_summary(summary, cover, metric, rho=1.0)
        assert len(set(summary.cluster_of)) == 2


class TestLabelPoints:
    def test_point_under_core_center_inherits(self):
        pts = [0.0, 0.3, 0.6, 0.9]
        cover, _, metric = prepared(pts, epsilon=2.0, rho=1.0)
        summary, flags = build_core_summary(cover, metric, min_pts=3)
        summary = merge_summary(summary, cover, metric, rho=1.0)
        cl = label_points_approx(summary, cover, metric, 1.0, flags)
        assert len(set(cl.cluster_ids)) == 1

    def test_border_at_exact_relaxed_radius(self):
        # threshold (rho/2+1)*eps = 3.0; the stray point sits exactly there
        pts = [0.0, 0.0, 0.0, 3.0]
        cover, _, metric = prepared(pts, epsilon=2.0, rho=1.0)
        summary, flags = build_core_summary(cover, metric, min_pts=3)
        summary = merge_summary(summary, cover, metric, rho=1.0)
        cl = label_points_approx(summary, cover, metric, 1.0, flags)
        assert Role(cl.roles[3]) == Role.BORDER
        assert cl.cluster_ids[3] == cl.cluster_ids[0]

    def test_point_beyond_relaxed_radius_is_outlier(self):
        pts = [0.0, 0.0, 0.0, 3.03]
        cover, _, metric = prepared(pts, epsilon=2.0, rho=1.0)
        summary, flags = build_core_summary(cover, metric, min_pts=3)
        summary = merge_summary(summary, cover, metric, rho=1.0)
        cl = label_points_approx(summary, cover, metric, 1.0, flags)
        assert Role(cl.roles[3]) == Role.OUTLIER
        assert cl.cluster_ids[3] == -1


class TestApproxDbscan:
    def test_rho_zero_matches_exact_core_partition(self):
        rng = np.random.default_rng(6)
        pts = rng.normal(0, 2, size=(100, 2))
        ds = numeric_dataset(pts)
        exact_cl, _ = exact_dbscan(ds, fresh_metric(), 0.8, 4)
        approx_cl, _ = approx_dbscan(ds, fresh_metric(), 0.8, 4, rho=0.0)
        cores_e = np.asarray(exact_cl.roles) == Role.CORE
        cores_a = np.asarray(approx_cl.roles) == Role.CORE
        assert np.array_equal(cores_e, cores_a)
        assert partitions_equal(
            exact_cl.cluster_ids, approx_cl.cluster_ids, np.flatnonzero(cores_e)
        )

    @settings(deadline=None, max_examples=20)
    @given(points_strategy, st.floats(0.3, 3.0), st.integers(2, 6), st.sampled_from([0.1, 0.5, 1.0]))
    def test_fuzzed_sandwich_and_validity(self, pts, epsilon, min_pts, rho):
        ds = numeric_dataset(pts)
        approx_cl, _ = approx_dbscan(ds, fresh_metric(), epsilon, min_pts, rho=rho)
        report = validate_rho_approx(ds, fresh_metric(), approx_cl, epsilon, min_pts, rho)
        assert report.ok, report.violations
        lo = brute_force_dbscan(ds, fresh_metric(), epsilon, min_pts)
        hi = brute_force_dbscan(ds, fresh_metric(), (1 + rho) * epsilon, min_pts)
        sandwich = check_sandwich(lo, approx_cl, hi)
        assert sandwich.ok, sandwich.violations

    @settings(deadline=None, max_examples=20)
    @given(points_strategy, st.floats(0.3, 3.0), st.integers(2, 5), st.sampled_from([0.5, 1.0, 2.0]))
    def test_single_step_closure(self, pts, epsilon, min_pts, rho):
        # any point within epsilon of a core shares (one of) its labels
        ds = numeric_dataset(pts)
        cl, _ = approx_dbscan(ds, fresh_metric(), epsilon, min_pts, rho=rho)
        values = ds.all_values()
        oracle = brute_force_dbscan(ds, fresh_metric(), epsilon, min_pts)
        for q in np.flatnonzero(np.asarray(oracle.roles) == Role.CORE):
            d = np.linalg.norm(values - values[q], axis=1)
            for p in np.flatnonzero(d <= epsilon):
                assert int(cl.cluster_ids[q]) in cl.labels_for(int(p))

    def test_rejects_rho_out_of_range(self):
        ds = numeric_dataset([0.0, 1.0])
        with pytest.raises(ConfigError):
            approx_dbscan(ds, fresh_metric(), 1.0, 2, rho=2.5)
        with pytest.raises(ConfigError):
            approx_dbscan(ds, fresh_metric(), 1.0, 2, rho=-0.1)

    def test_counters_report_summary(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(0, 1, size=(80, 2))
        _, counters = approx_dbscan(numeric_dataset(pts), fresh_metric(), 0.7, 4, rho=0.5)
        assert counters.summary_size > 0
        assert counters.centers > 0
