import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import check_net, check_tree_structure, fresh_metric, linear_scan_nn, numeric_dataset
from metric_dbscan import ConfigError, build, level_net, nearest_neighbor
from metric_dbscan.covertree import floor_log2

points_strategy = st.lists(
    st.tuples(st.floats(-40, 40), st.floats(-40, 40)),
    min_size=1,
    max_size=30,
)


def build_tree(values):
    ds = numeric_dataset(values)
    return build(range(ds.n), ds, fresh_metric()), ds


class TestFloorLog2:
    @pytest.mark.parametrize(
        "x,expected",
        [(1.0, 0), (2.0, 1), (4.0, 2), (5.0, 2), (0.75, -1), (0.5, -1), (3.0, 1)],
    )
    def test_values(self, x, expected):
        assert floor_log2(x) == expected

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            floor_log2(0.0)


class TestBuild:
    def test_single_point_convention(self):
        tree, _ = build_tree([[7.0]])
        assert tree.l_top == tree.l_bottom == 0
        assert tree.n_nodes == 1

    def test_three_points_pass_structure_audit(self):
        tree, _ = build_tree([0.0, 4.0, 5.0])
        check_tree_structure(tree)

    def test_duplicates_fold_into_multiplicity(self):
        tree, _ = build_tree([0.0, 0.0, 4.0])
        assert tree.n_nodes == 2
        assert tree.multiplicity == {0: 2, 2: 1}

    def test_empty_input(self):
        ds = numeric_dataset([[0.0]])
        with pytest.raises(ConfigError):
            build([], ds, fresh_metric())

    def test_level_bounds(self):
        rng = np.random.default_rng(3)
        tree, ds = build_tree(rng.uniform(-30, 30, size=(40, 2)))
        values = ds.all_values()
        diff = values[:, None, :] - values[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        off = dist[np.triu_indices(ds.n, k=1)]
        delta, small = off.max(), off[off > 0].min()
        assert tree.l_bottom >= floor_log2(small)
        # inclusive level convention can sit one above the ceil bound at
        # exact powers of two
        assert tree.l_top <= math.ceil(math.log2(delta)) + 1

    @settings(deadline=None, max_examples=50)
    @given(points_strategy)
    def test_fuzzed_structure_audit(self, pts):
        tree, _ = build_tree(pts)
        check_tree_structure(tree)

    def test_larger_seeded_audit(self):
        rng = np.random.default_rng(11)
        tree, _ = build_tree(rng.normal(0, 5, size=(500, 2)))
        check_tree_structure(tree)


class TestNearestNeighbor:
    def test_stored_point_query(self):
        tree, ds = build_tree([0.0, 4.0, 5.0])
        idx, d = nearest_neighbor(tree, ds.value(1))
        assert idx == 1
        assert d == 0.0

    def test_off_grid_query(self):
        tree, _ = build_tree([0.0, 4.0, 5.0])
        idx, d = nearest_neighbor(tree, np.array([3.9]))
        assert idx == 1
        assert d == pytest.approx(0.1)

    def test_matches_linear_scan_on_random_queries(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-10, 10, size=(100, 2))
        tree, ds = build_tree(pts)
        for query in rng.uniform(-10, 10, size=(50, 2)):
            _, expected = linear_scan_nn(pts, query)
            _, got = nearest_neighbor(tree, query)
            assert got == expected

    @settings(deadline=None, max_examples=40)
    @given(points_strategy, st.tuples(st.floats(-40, 40), st.floats(-40, 40)))
    def test_fuzzed_queries_match_oracle(self, pts, query):
        tree, ds = build_tree(pts)
        _, expected = linear_scan_nn(np.unique(ds.all_values(), axis=0), np.asarray(query))
        _, got = nearest_neighbor(tree, np.asarray(query, dtype=np.float64))
        assert got == expected

    def test_early_stop_returns_within_threshold(self):
        rng = np.random.default_rng(9)
        pts = rng.uniform(0, 4, size=(60, 2))
        tree, _ = build_tree(pts)
        _, d = nearest_neighbor(tree, pts[17] + 0.01, early_stop=1.0)
        assert d <= 1.0


class TestLevelNet:
    def test_clamps_to_root_and_bottom(self):
        tree, ds = build_tree([0.0, 4.0, 5.0])
        assert list(level_net(tree, tree.l_top + 5)) == [int(tree.node_points[0])]
        assert sorted(level_net(tree, tree.l_bottom - 5)) == [0, 1, 2]

    def test_unit_net_for_epsilon_two(self):
        rng = np.random.default_rng(21)
        pts = rng.uniform(0, 8, size=(80, 2))
        tree, ds = build_tree(pts)
        i0 = floor_log2(2.0 / 2.0)
        assert i0 == 0
        check_net(ds, level_net(tree, i0), radius=1.0)

    @settings(deadline=None, max_examples=30)
    @given(points_strategy)
    def test_every_level_is_a_net_of_the_dataset(self, pts):
        tree, ds = build_tree(pts)
        for level in range(tree.l_bottom, tree.l_top + 1):
            check_net(ds, level_net(tree, level), radius=math.ldexp(1.0, level))

    def test_duplicates_excluded_once(self):
        tree, ds = build_tree([0.0, 0.0, 4.0])
        assert sorted(level_net(tree, tree.l_bottom)) == [0, 2]
