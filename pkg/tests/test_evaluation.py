"""下游评估、可辨识性与上界量"""
import numpy as np
import pytest

from tricl_lab.exceptions import EvaluationError
from tricl_lab.evaluation import (bifactor_vs_trifactor_experiment, bound_values, bounds_sweep,
                                  consecutive_blocks, dimension_block_probe, identifiability_distance,
                                  importance_distribution, knn_eval, linear_probe,
                                  random_subset_retrieval, retrieval_map, scl_random_subset_eval)
from tricl_lab.graph import normalize
from tricl_lab.spectra import decompose, scl_closed_form, tricl_closed_form

LABELS = np.array([0, 0, 0, 1, 1, 1])


def clustered_features():
    return np.array([[1.0, 0.1], [0.9, 0.0], [1.1, -0.1],
                     [0.0, 1.0], [0.1, 0.9], [-0.1, 1.1]])


class TestLinearProbe:
    def test_separable(self):
        assert linear_probe(clustered_features(), LABELS) == 0.0

    def test_uninformative_feature(self):
        weights = np.array([0.1, 0.1, 0.1, 0.2, 0.2, 0.3])
        error = linear_probe(np.ones((6, 1)), LABELS, weights)
        assert error == pytest.approx(0.3)

    def test_singular_without_ridge(self):
        features = np.column_stack([np.ones(6), np.ones(6)])
        with pytest.raises(EvaluationError):
            linear_probe(features, LABELS, ridge=0.0)

    def test_label_length(self):
        with pytest.raises(EvaluationError):
            linear_probe(clustered_features(), LABELS[:4])

    def test_single_class(self):
        with pytest.raises(EvaluationError):
            linear_probe(clustered_features(), np.zeros(6))


class TestKnn:
    def test_clusters(self):
        results = knn_eval(clustered_features(), LABELS, [(0, 2)], neighbors=2)
        assert results == [('1-2', 1.0)]

    def test_tie_goes_to_smallest_class(self):
        features = np.array([[1.0], [1.0], [1.0]])
        results = knn_eval(features, np.array([0, 1, 1]), [(0, 1)], neighbors=2)
        # 样本 1 与 2 的票数并列, 判为 0 类; 样本 0 的邻居全是 1 类
        assert results[0][1] == 0.0

    def test_blocks(self):
        assert consecutive_blocks(5, 2) == [(0, 2), (2, 4), (4, 5)]
        results = knn_eval(np.random.default_rng(0).normal(size=(6, 5)), LABELS,
                           consecutive_blocks(5, 2), neighbors=1)
        assert [label for label, _ in results] == ['1-2', '3-4', '5-5']

    def test_neighbors_range(self):
        with pytest.raises(EvaluationError):
            knn_eval(clustered_features(), LABELS, [(0, 2)], neighbors=6)


class TestRetrieval:
    def test_perfect(self):
        assert retrieval_map(clustered_features(), LABELS, top_r=2) == 1.0

    def test_hand_example(self):
        features = np.array([[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [0.2, 0.8]])
        labels = np.array([0, 1, 1, 0])
        value = retrieval_map(features, labels, top_r=2)
        # q0 → [1, 3]: hits (0,1) → AP 1/2; q1 → [0, 3]: hits (0,0) → 0
        # q2 → [3, 1]: hits (0,1) → 1/2; q3 → [2, 1]: hits (0,0) → 0
        assert value == pytest.approx(0.25)

    def test_top_r_range(self):
        with pytest.raises(EvaluationError):
            retrieval_map(clustered_features(), LABELS, top_r=6)


class TestSignFlips:
    @pytest.fixture
    def features_and_labels(self):
        rng = np.random.default_rng(3)
        return rng.normal(size=(20, 6)), rng.integers(0, 3, 20)

    @pytest.mark.parametrize('flip_seed', range(3))
    def test_knn_invariant(self, features_and_labels, flip_seed):
        features, labels = features_and_labels
        signs = np.random.default_rng(flip_seed).choice([-1.0, 1.0], 6)
        blocks = consecutive_blocks(6, 2) + [(0, 6)]
        assert knn_eval(features * signs, labels, blocks, 3) == knn_eval(features, labels, blocks, 3)

    @pytest.mark.parametrize('flip_seed', range(3))
    def test_retrieval_invariant(self, features_and_labels, flip_seed):
        features, labels = features_and_labels
        signs = np.random.default_rng(flip_seed).choice([-1.0, 1.0], 6)
        assert retrieval_map(features * signs, labels, 4) == retrieval_map(features, labels, 4)


class TestAllDimensions:
    @pytest.mark.parametrize('rotation_seed', range(3))
    def test_scl_and_tricl_probes_agree(self, class_graph, rotation_seed):
        """m = k 时两种最优特征张成同一子空间"""
        d = class_graph.degrees
        ref = decompose(normalize(class_graph).matrix, 4)
        rotation = np.linalg.qr(np.random.default_rng(rotation_seed).standard_normal((4, 4)))[0]
        tricl_error = linear_probe(tricl_closed_form(ref, d).features, class_graph.labels, d, ridge=0.0)
        scl_error = linear_probe(scl_closed_form(ref, d, rotation), class_graph.labels, d, ridge=0.0)
        assert abs(tricl_error - scl_error) <= 1e-10


class TestRandomSubsets:
    def test_full_subset_equals_probe(self):
        features = clustered_features()
        assert scl_random_subset_eval(features, LABELS, 2, trials=3, seed=0) == linear_probe(features, LABELS)

    def test_deterministic(self):
        features = np.random.default_rng(0).normal(size=(6, 4))
        first = scl_random_subset_eval(features, LABELS, 2, trials=1, seed=5)
        assert first == scl_random_subset_eval(features, LABELS, 2, trials=1, seed=5)
        assert (random_subset_retrieval(features, LABELS, 2, 4, 1, top_r=2)
                == random_subset_retrieval(features, LABELS, 2, 4, 1, top_r=2))

    def test_invalid_m(self):
        with pytest.raises(EvaluationError):
            scl_random_subset_eval(clustered_features(), LABELS, 3, trials=1, seed=0)

    def test_block_probe(self):
        features = np.column_stack([clustered_features(), np.ones(6), np.ones(6)])
        errors = dimension_block_probe(features, LABELS, 2)
        assert set(errors) == {'top', 'middle', 'bottom'}
        assert errors['top'] == 0.0
        assert errors['bottom'] == pytest.approx(0.5)


class TestIdentifiabilityDistance:
    def test_single_run(self):
        report = identifiability_distance([np.array([[-1.0], [2.0]])], 'x')
        assert report.no_pairs
        assert report.mean_pairwise_distance == 0.0 and report.distance_variance == 0.0

    def test_pairs(self):
        runs = [np.array([[-1.0], [0.0]]), np.array([[-1.0], [3.0]]), np.array([[-1.0], [4.0]])]
        report = identifiability_distance(runs, 'x')
        assert [d for _, _, d in report.pairs] == [3.0, 4.0, 1.0]
        assert report.mean_pairwise_distance == pytest.approx(8.0 / 3.0)
        assert report.distance_variance == pytest.approx(np.var([3.0, 4.0, 1.0]))

    def test_requires_canonical(self):
        with pytest.raises(EvaluationError):
            identifiability_distance([np.array([[1.0], [2.0]])])

    def test_shape_mismatch(self):
        with pytest.raises(EvaluationError):
            identifiability_distance([np.array([[-1.0]]), np.array([[-1.0], [1.0]])])

    def test_small_experiment(self):
        bi, tri = bifactor_vs_trifactor_experiment(30, 20, 4, 5, seed=0)
        assert tri.mean_pairwise_distance < 1e-12
        assert bi.mean_pairwise_distance > 0.1
        assert bi.num_runs == tri.num_runs == 5
        assert len(bi.pairs) == 10


class TestBounds:
    def test_values(self):
        report = bound_values([1.0, 0.5, 0.25, 0.1], m=1, k=2, alpha=0.1)
        assert report.raw_scl == pytest.approx(0.5 * (1.0 + 0.25) + 0.0625 + 0.01)
        assert report.raw_tricl == pytest.approx(0.25 + 0.0625 + 0.01)
        assert report.u_tricl == pytest.approx(32.0 * report.raw_tricl + 8.0)
        assert report.gap == pytest.approx(report.gap_lower_bound)

    def test_gap_zero_at_full_rank(self):
        report = bound_values([1.0, 0.5, 0.25], m=3, k=3, alpha=0.0)
        assert report.gap == 0.0

    def test_random_spectra_gap_nonnegative(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            sigma = np.sort(rng.uniform(0.0, 1.0, 12))[::-1]
            for report in bounds_sweep(sigma, 8, range(1, 9), alpha=rng.uniform()):
                assert report.gap >= -1e-12

    def test_invalid(self):
        with pytest.raises(EvaluationError):
            bound_values([1.0, 0.5], m=3, k=2, alpha=0.0)
        with pytest.raises(EvaluationError):
            bound_values([1.0, 0.5], m=1, k=2, alpha=1.5)

    def test_importance_distribution(self):
        share = importance_distribution(np.array([3.0, 1.0]))
        np.testing.assert_allclose(share, [0.75, 0.25])
        with pytest.raises(EvaluationError):
            importance_distribution(np.zeros(2))
