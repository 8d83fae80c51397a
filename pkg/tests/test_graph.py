"""增强图构造与归一化"""
import json

import numpy as np
import pytest

from tricl_lab.exceptions import ConfigurationError, GraphConstructionError
from tricl_lab.graph import (bipartite_from_joint, build_from_kernel, compute_alpha, denormalize,
                             from_adjacency, generate_bipartite_graph, generate_class_graph,
                             graph_from_dict, graph_to_dict, normalize, normalize_bipartite)
from tricl_lab.models import BipartiteGraphSpec, ClassGraphSpec


def assert_graph_invariants(g):
    a = g.adjacency
    assert np.array_equal(a, a.T)
    assert np.all(a >= 0)
    assert abs(a.sum() - 1.0) <= 1e-12
    assert np.all(g.degrees > 0)
    np.testing.assert_allclose(g.degrees, a.sum(axis=1), rtol=0, atol=0)


class TestBuildFromKernel:
    def test_two_naturals(self):
        g = build_from_kernel([0.5, 0.5], [[0.9, 0.1], [0.1, 0.9]], natural_labels=[0, 1])
        assert_graph_invariants(g)
        expected = 0.5 * np.array([[0.81 + 0.01, 0.09 + 0.09], [0.09 + 0.09, 0.01 + 0.81]])
        np.testing.assert_allclose(g.adjacency, expected, atol=1e-15)
        assert g.labels.tolist() == [0, 1]

    def test_alpha_counts_label_changing_mass(self):
        g = build_from_kernel([0.5, 0.5], [[0.9, 0.1], [0.1, 0.9]], natural_labels=[0, 1])
        assert compute_alpha(g) == pytest.approx(0.1, abs=1e-15)

    def test_kernel_row_must_sum_to_one(self):
        with pytest.raises(GraphConstructionError):
            build_from_kernel([0.5, 0.5], [[0.8, 0.1], [0.1, 0.9]])

    def test_naturals_must_be_distribution(self):
        with pytest.raises(GraphConstructionError):
            build_from_kernel([0.7, 0.7], [[1.0, 0.0], [0.0, 1.0]])

    def test_shape_mismatch(self):
        with pytest.raises(GraphConstructionError):
            build_from_kernel([1.0], [[0.5, 0.5], [0.5, 0.5]])


class TestFromAdjacency:
    def test_two_node(self, two_node_graph):
        assert_graph_invariants(two_node_graph)
        np.testing.assert_allclose(two_node_graph.degrees, [0.5, 0.5], atol=1e-15)

    def test_asymmetric_rejected(self):
        with pytest.raises(GraphConstructionError):
            from_adjacency([[0.3, 0.3], [0.1, 0.3]], [0, 1])

    def test_mass_rejected(self):
        with pytest.raises(GraphConstructionError):
            from_adjacency([[0.3, 0.2], [0.2, 0.2]], [0, 1])

    def test_isolated_node_rejected(self):
        with pytest.raises(GraphConstructionError):
            from_adjacency([[1.0, 0.0], [0.0, 0.0]], [0, 1])

    def test_negative_rejected(self):
        with pytest.raises(GraphConstructionError):
            from_adjacency([[0.6, -0.1], [-0.1, 0.6]], [0, 1])

    def test_alpha_needs_metadata(self, two_node_graph):
        with pytest.raises(GraphConstructionError):
            compute_alpha(two_node_graph)


class TestGenerateClassGraph:
    def test_invariants(self, class_graph, class_spec):
        assert_graph_invariants(class_graph)
        assert class_graph.n_nodes == class_spec.n_nodes == 12
        assert class_graph.num_classes == 2

    def test_deterministic(self):
        spec = ClassGraphSpec(num_classes=2, naturals_per_class=2, augmentations_per_natural=2,
                              cross_class_leak=0.1, seed=7)
        first = generate_class_graph(spec)
        second = generate_class_graph(spec)
        assert np.array_equal(first.adjacency, second.adjacency)
        assert np.array_equal(first.labels, second.labels)

    def test_zero_leak_is_block_diagonal(self):
        spec = ClassGraphSpec(num_classes=3, naturals_per_class=2, augmentations_per_natural=2,
                              cross_class_leak=0.0, seed=1)
        g = generate_class_graph(spec)
        cross = g.labels[:, None] != g.labels[None, :]
        assert np.all(g.adjacency[cross] == 0.0)
        assert compute_alpha(g) == 0.0

    def test_alpha_grows_with_leak(self):
        alphas = []
        for beta in (0.1, 0.3):
            spec = ClassGraphSpec(num_classes=2, naturals_per_class=3, augmentations_per_natural=2,
                                  cross_class_leak=beta, seed=5)
            alphas.append(compute_alpha(generate_class_graph(spec)))
        assert alphas[0] < alphas[1]
        assert alphas[0] == pytest.approx(0.1, abs=1e-12)

    def test_single_class_requires_zero_leak(self):
        with pytest.raises(ConfigurationError):
            ClassGraphSpec(num_classes=1, naturals_per_class=2, augmentations_per_natural=2,
                           cross_class_leak=0.1)

    def test_invalid_counts(self):
        with pytest.raises(ConfigurationError):
            ClassGraphSpec(num_classes=2, naturals_per_class=0, augmentations_per_natural=2)


class TestNormalize:
    def test_two_node(self, two_node_graph):
        a_bar = normalize(two_node_graph)
        np.testing.assert_allclose(a_bar.matrix, [[0.6, 0.4], [0.4, 0.6]], atol=1e-15)

    def test_round_trip(self, class_graph):
        restored = denormalize(normalize(class_graph))
        np.testing.assert_allclose(restored, class_graph.adjacency, rtol=1e-14, atol=1e-17)

    def test_spectrum_bounded_by_one(self, class_graph):
        values = np.linalg.eigvalsh(normalize(class_graph).matrix)
        assert values.max() == pytest.approx(1.0, abs=1e-12)
        assert values.min() >= -1e-12

    def test_denormalize_needs_degrees(self):
        with pytest.raises(GraphConstructionError):
            denormalize(np.eye(2))


class TestBipartite:
    def test_marginals(self, bipartite_graph):
        assert bipartite_graph.shape == (6, 5)
        assert bipartite_graph.marginal_a.sum() == pytest.approx(1.0, abs=1e-12)
        assert bipartite_graph.marginal_b.sum() == pytest.approx(1.0, abs=1e-12)

    def test_top_singular_value_is_one(self, bipartite_graph):
        sigma = np.linalg.svd(normalize_bipartite(bipartite_graph), compute_uv=False)
        assert sigma[0] == pytest.approx(1.0, abs=1e-12)

    def test_deterministic(self):
        spec = BipartiteGraphSpec(n_a=8, n_b=6, num_classes=2, seed=4)
        assert np.array_equal(generate_bipartite_graph(spec).joint, generate_bipartite_graph(spec).joint)

    def test_zero_marginal_rejected(self):
        with pytest.raises(GraphConstructionError):
            bipartite_from_joint([[0.5, 0.0], [0.5, 0.0]])


class TestSerialization:
    @pytest.mark.parametrize('fixture', ['two_node_graph', 'class_graph', 'bipartite_graph'])
    def test_json_round_trip(self, fixture, request):
        g = request.getfixturevalue(fixture)
        restored = graph_from_dict(json.loads(json.dumps(graph_to_dict(g))))
        assert type(restored) is type(g)
        if hasattr(g, 'adjacency'):
            assert np.array_equal(restored.adjacency, g.adjacency)
            assert np.array_equal(restored.labels, g.labels)
        else:
            assert np.array_equal(restored.joint, g.joint)

    def test_alpha_survives_round_trip(self, class_graph):
        restored = graph_from_dict(json.loads(json.dumps(graph_to_dict(class_graph))))
        assert compute_alpha(restored) == compute_alpha(class_graph)

    def test_size_mismatch(self, two_node_graph):
        data = graph_to_dict(two_node_graph)
        data['n'] = 3
        with pytest.raises(GraphConstructionError):
            graph_from_dict(data)
