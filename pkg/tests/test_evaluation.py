import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from metric_dbscan import adjusted_mutual_information, adjusted_rand_index

import pytest

labels_strategy = st.lists(st.integers(-1, 4), min_size=2, max_size=30)


class TestAdjustedRandIndex:
    def test_identical(self):
        assert adjusted_rand_index([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0

    def test_crossed_pairs(self):
        # 2x2 contingency of all ones: Index=0, Expected=2/3, Max=2 -> -0.5
        assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5, abs=1e-9)

    def test_label_permutation_invariance(self):
        assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0

    def test_outliers_form_a_class(self):
        assert adjusted_rand_index([-1, -1, 0, 0], [5, 5, 9, 9]) == 1.0

    def test_degenerate_single_cluster(self):
        assert adjusted_rand_index([0, 0, 0], [0, 0, 0]) == 1.0
        assert adjusted_rand_index([0, 0, 0], [0, 0, 1]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            adjusted_rand_index([0, 1], [0, 1, 2])


class TestAdjustedMutualInformation:
    def test_identical(self):
        assert adjusted_mutual_information([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(1.0)

    def test_label_permutation_invariance(self):
        a = [0, 0, 1, 1, 2, 2]
        b = [1, 1, 2, 0, 0, 2]
        remap = {0: 7, 1: 3, 2: 5}
        assert adjusted_mutual_information(a, b) == pytest.approx(
            adjusted_mutual_information(a, [remap[x] for x in b])
        )

    def test_random_labelings_average_near_zero(self):
        rng = np.random.default_rng(17)
        scores = []
        for _ in range(100):
            a = rng.integers(0, 5, size=1000)
            b = rng.integers(0, 5, size=1000)
            scores.append(adjusted_mutual_information(a, b))
        assert abs(float(np.mean(scores))) < 0.05

    def test_degenerate(self):
        assert adjusted_mutual_information([2, 2, 2], [0, 0, 0]) == 1.0


class TestSharedProperties:
    @settings(deadline=None, max_examples=40)
    @given(labels_strategy)
    def test_self_agreement(self, labels):
        assert adjusted_rand_index(labels, labels) == 1.0
        assert adjusted_mutual_information(labels, labels) == pytest.approx(1.0)

    @settings(deadline=None, max_examples=40)
    @given(labels_strategy, st.randoms(use_true_random=False))
    def test_symmetry(self, labels, rand):
        other = [rand.randint(-1, 3) for _ in labels]
        assert adjusted_rand_index(labels, other) == adjusted_rand_index(other, labels)
        assert adjusted_mutual_information(labels, other) == pytest.approx(
            adjusted_mutual_information(other, labels)
        )
