import itertools

import numpy as np
import pytest

from gammaclust.core import DataSet, DegenerateK, Partition
from gammaclust.evaluation import (
    LabeledPartition,
    bhi,
    ch_index,
    gap_statistic,
    kmeans,
    kmeans_select_ch,
    kmeans_select_gap,
    within_ss,
)


def brute_force_bhi(labels, k, truth):
    """Direct double loop over ordered pairs, the oracle for the fast version."""
    total = 0.0
    for j in range(k):
        members = [truth[i] for i in range(len(truth)) if labels[i] == j]
        n_k = len(members)
        if n_k <= 1:
            continue
        same = sum(
            1 for a, b in itertools.permutations(range(n_k), 2) if members[a] == members[b]
        )
        total += same / (n_k * (n_k - 1))
    return total / k


class TestBhi:
    def test_perfect_labeling(self):
        part = Partition(np.array([0, 0, 1, 1, 2, 2]), 3)
        lp = LabeledPartition(part, ("a", "a", "b", "b", "c", "c"))
        assert bhi(lp) == 1.0

    def test_singleton_contributes_zero_but_counts(self):
        # perfect labeling with a singleton cluster caps the average below 1
        part = Partition(np.array([0, 0, 1, 1, 2]), 3)
        lp = LabeledPartition(part, ("a", "a", "b", "b", "c"))
        assert bhi(lp) == pytest.approx(2.0 / 3.0)

    def test_single_cluster_two_classes(self):
        n = 200
        part = Partition(np.zeros(n, dtype=int), 1)
        truth = tuple(["a"] * (n // 2) + ["b"] * (n // 2))
        # same-class ordered pairs: 2 * (n/2)(n/2 - 1) over n(n-1)
        expected = (n / 2 - 1) / (n - 1)
        assert bhi(LabeledPartition(part, truth)) == pytest.approx(expected)
        assert expected == pytest.approx(0.497, abs=1e-3)

    def test_matches_brute_force(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 30))
            k = int(rng.integers(1, 5))
            labels = rng.integers(0, k, size=n)
            labels[0] = k - 1  # make sure the top label exists
            truth = tuple(str(v) for v in rng.integers(0, 3, size=n))
            part = Partition(labels, k)
            assert bhi(LabeledPartition(part, truth)) == pytest.approx(
                brute_force_bhi(labels, k, truth)
            )

    def test_range_and_singletons(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 20))
            k = int(rng.integers(1, 6))
            labels = rng.integers(0, k, size=n)
            truth = tuple(str(v) for v in rng.integers(0, 4, size=n))
            v = bhi(LabeledPartition(Partition(labels, k), truth))
            assert 0.0 <= v <= 1.0

    def test_label_permutation_invariance(self, rng):
        for _ in range(100):
            n = int(rng.integers(4, 40))
            k = int(rng.integers(2, 5))
            labels = rng.integers(0, k, size=n)
            truth = tuple(str(v) for v in rng.integers(0, 3, size=n))
            base = bhi(LabeledPartition(Partition(labels, k), truth))
            perm = rng.permutation(k)
            relabeled = perm[labels]
            assert bhi(LabeledPartition(Partition(relabeled, k), truth)) == pytest.approx(base)
            # and of the category names
            renamed = tuple("x" + t for t in truth)
            assert bhi(LabeledPartition(Partition(labels, k), renamed)) == pytest.approx(base)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            LabeledPartition(Partition(np.array([0, 0]), 1), ("a",))


class TestChIndex:
    def test_hand_computed_case(self):
        data = DataSet(np.array([0.0, 1.0, 10.0, 11.0]))
        part = Partition(np.array([0, 0, 1, 1]), 2)
        # W = 0.5 + 0.5 = 1, total SS = 101, B = 100, CH = (100/1)/(1/2)
        assert ch_index(data, part) == pytest.approx(200.0)

    def test_perfect_separation_is_infinite(self):
        data = DataSet(np.array([0.0, 10.0]))
        with pytest.raises(DegenerateK):
            # k = n is degenerate per the contract
            ch_index(data, Partition(np.array([0, 1]), 2))
        data3 = DataSet(np.array([0.0, 0.0, 10.0]))
        assert ch_index(data3, Partition(np.array([0, 0, 1]), 2)) == np.inf

    def test_k_bounds(self, rng):
        data = DataSet(rng.normal(size=(10, 1)))
        with pytest.raises(DegenerateK):
            ch_index(data, Partition(np.zeros(10, dtype=int), 1))

    def test_rigid_motion_invariance(self, rng):
        x = rng.normal(size=(40, 2))
        labels = rng.integers(0, 3, size=40)
        part = Partition(labels, 3)
        base = ch_index(DataSet(x), part)
        theta = 0.7
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        moved = x @ rot.T + np.array([5.0, -3.0])
        assert ch_index(DataSet(moved), part) == pytest.approx(base, rel=1e-9)


class TestKmeans:
    def test_k_equals_n_zero_within(self, rng):
        x = rng.normal(size=(6, 2))
        data = DataSet(x)
        _, part = kmeans(data, 6, seed=0)
        assert within_ss(data, part) == pytest.approx(0.0, abs=1e-20)

    def test_two_cluster_exhaustive_oracle(self):
        data = DataSet(np.array([0.0, 1.0, 10.0, 11.0]))
        centers, part = kmeans(data, 2, restarts=4, seed=0)
        # best of the 7 bipartitions puts {0,1} against {10,11}
        best_w = min(
            within_ss(data, Partition(np.array(assign_), 2))
            for assign_ in itertools.product([0, 1], repeat=4)
            if len(set(assign_)) == 2
        )
        assert within_ss(data, part) == pytest.approx(best_w)
        assert sorted(centers.ravel().tolist()) == [0.5, 10.5]

    def test_objective_nonincreasing_vs_restarts(self, rng):
        data = DataSet(rng.normal(size=(50, 2)))
        w1 = within_ss(data, kmeans(data, 3, restarts=1, seed=5)[1])
        w8 = within_ss(data, kmeans(data, 3, restarts=8, seed=5)[1])
        assert w8 <= w1 + 1e-12

    def test_objective_nonincreasing_across_iterations(self, rng):
        from gammaclust.evaluation import _lloyd

        for _ in range(30):
            x = rng.normal(size=(int(rng.integers(10, 80)), 2)) * 3.0
            k = int(rng.integers(2, 6))
            seeds = x[rng.choice(len(x), size=k, replace=False)].copy()
            _, _, trace = _lloyd(x, seeds, k)
            assert np.all(np.diff(trace) <= 1e-9)

    def test_determinism(self, rng):
        data = DataSet(rng.normal(size=(30, 2)))
        a = kmeans(data, 4, seed=3)
        b = kmeans(data, 4, seed=3)
        assert np.array_equal(a[1].labels, b[1].labels)

    def test_k_validation(self, rng):
        data = DataSet(rng.normal(size=(5, 1)))
        with pytest.raises(ValueError):
            kmeans(data, 0)
        with pytest.raises(ValueError):
            kmeans(data, 6)


class TestGap:
    def test_uniform_data_gap_near_zero(self):
        r = np.random.default_rng(9)
        data = DataSet(r.random((150, 2)))
        gaps = gap_statistic(data, [3], b_refs=24, seed=9)
        # the data match the reference distribution: gap within MC noise
        assert abs(gaps[3]) < 0.1

    def test_deterministic_given_seed(self, rng):
        data = DataSet(rng.normal(size=(40, 2)))
        a = gap_statistic(data, [1, 2, 3], b_refs=1, seed=4)
        b = gap_statistic(data, [1, 2, 3], b_refs=1, seed=4)
        assert a == b

    def test_k_range_validation(self, rng):
        data = DataSet(rng.normal(size=(10, 1)))
        with pytest.raises(ValueError):
            gap_statistic(data, [0, 1], b_refs=1)
        with pytest.raises(ValueError):
            gap_statistic(data, [10], b_refs=1)


class TestSelectors:
    def test_ch_selects_true_k_on_separated_blobs(self, rng):
        centers = np.array([[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]])
        x = np.vstack([c + rng.normal(scale=0.5, size=(20, 2)) for c in centers])
        data = DataSet(x)
        k, part, scores = kmeans_select_ch(data, range(1, 7), seed=2)
        assert k == 3
        assert part.k == 3
        assert set(scores) == {2, 3, 4, 5, 6}

    def test_gap_one_se_prefers_one_on_single_blob(self, rng):
        data = DataSet(rng.normal(size=(100, 2)))
        k, _, _ = kmeans_select_gap(data, range(1, 6), b_refs=10, seed=3)
        assert k == 1

    def test_gap_argmax_rule_available(self, rng):
        centers = np.array([[0.0, 0.0], [9.0, 0.0]])
        x = np.vstack([c + rng.normal(scale=0.5, size=(25, 2)) for c in centers])
        data = DataSet(x)
        k, _, gaps = kmeans_select_gap(data, range(1, 5), b_refs=10, seed=1, rule="argmax")
        assert k == max(gaps, key=lambda kk: gaps[kk])

    def test_ch_needs_k_at_least_two(self, rng):
        data = DataSet(rng.normal(size=(20, 1)))
        with pytest.raises(DegenerateK):
            kmeans_select_ch(data, [1], seed=0)
