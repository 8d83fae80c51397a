"""损失函数: 取值、显式成对求和与梯度检查"""
import numpy as np
import pytest
from scipy.special import logsumexp

from tricl_lab.exceptions import LossInputError
from tricl_lab.graph import bipartite_from_joint, normalize, normalize_bipartite
from tricl_lab.losses import (dec_penalty, finite_difference_check, relative_error, scl_loss,
                              tri_infonce_loss, triclip_loss, tricl_loss, trimse_loss)
from tricl_lab.utils.helpers import softplus

from conftest import random_kernel_graph

INSTANCES = range(20)


def _instance(seed, n=8, k=3):
    rng = np.random.default_rng(seed)
    graph = random_kernel_graph(rng, n)
    features = rng.normal(0.0, 1.0 / np.sqrt(n), (n, k))
    raw = rng.normal(0.0, 0.5, k)
    return graph, features, raw


def brute_force_tricl(graph, features, s, weight):
    """显式成对求和的期望形式"""
    a, d = graph.adjacency, graph.degrees
    f = features / np.sqrt(d)[:, None]
    n = a.shape[0]
    positive = 0.0
    negative = 0.0
    for x in range(n):
        for y in range(n):
            z = float(np.sum(f[x] * s * f[y]))
            positive += a[x, y] * z
            negative += d[x] * d[y] * z ** 2
    second = np.zeros((f.shape[1], f.shape[1]))
    for x in range(n):
        second += d[x] * np.outer(f[x], f[x])
    return -2.0 * positive + negative + weight * float(np.sum((second - np.eye(f.shape[1])) ** 2))


class TestSclLoss:
    def test_two_node_closed_form(self):
        root = np.sqrt(0.2)
        f = np.array([[1.0, root], [1.0, -root]]) * np.sqrt(0.5)
        result = scl_loss(np.array([[0.6, 0.4], [0.4, 0.6]]), f)
        # ‖Ā - FFᵀ‖² - ‖Ā‖² = 0 - (1 + 0.04)
        assert result.value == pytest.approx(-1.04, abs=1e-14)

    @pytest.mark.parametrize('seed', range(5))
    def test_matches_pair_sum(self, seed):
        graph, features, _ = _instance(seed, n=12, k=4)
        exact = scl_loss(normalize(graph), features).value
        assert exact == pytest.approx(brute_force_tricl(graph, features, np.ones(4), 0.0), abs=1e-10)

    def test_shape_error(self):
        with pytest.raises(LossInputError):
            scl_loss(np.eye(3), np.ones((2, 2)))

    @pytest.mark.parametrize('seed', INSTANCES)
    def test_gradient(self, seed):
        graph, features, _ = _instance(seed)
        a_bar = normalize(graph)
        result = finite_difference_check(lambda p: scl_loss(a_bar, p['features']), {'features': features})
        assert result.passed(1e-5)


class TestTriclLoss:
    @pytest.mark.parametrize('seed', range(5))
    def test_matches_pair_sum(self, seed):
        graph, features, raw = _instance(seed, n=12, k=4)
        exact = tricl_loss(normalize(graph), features, raw, 0.7).value
        assert exact == pytest.approx(brute_force_tricl(graph, features, softplus(raw), 0.7), abs=1e-10)

    def test_unit_importance_without_penalty_is_scl(self):
        graph, features, _ = _instance(3)
        a_bar = normalize(graph)
        raw = np.full(3, np.log(np.e - 1.0))
        np.testing.assert_allclose(tricl_loss(a_bar, features, raw, 0.0).value,
                                   scl_loss(a_bar, features).value, rtol=1e-12)

    def test_raw_length_error(self):
        graph, features, _ = _instance(0)
        with pytest.raises(LossInputError):
            tricl_loss(normalize(graph), features, np.zeros(2))

    def test_negative_penalty_error(self):
        graph, features, raw = _instance(0)
        with pytest.raises(LossInputError):
            tricl_loss(normalize(graph), features, raw, -1.0)

    @pytest.mark.parametrize('seed', INSTANCES)
    def test_gradient(self, seed):
        graph, features, raw = _instance(seed)
        a_bar = normalize(graph)
        result = finite_difference_check(
            lambda p: tricl_loss(a_bar, p['features'], p['raw_importance'], 1.0),
            {'features': features, 'raw_importance': raw})
        assert result.passed(1e-5)


class TestDecPenalty:
    def test_zero_at_orthonormal(self):
        q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 3)))
        assert dec_penalty(q).value == pytest.approx(0.0, abs=1e-24)

    def test_gradient(self):
        features = np.random.default_rng(1).normal(size=(5, 2))
        result = finite_difference_check(lambda p: dec_penalty(p['features']), {'features': features})
        assert result.passed(1e-5)


class TestTriInfoNCE:
    @pytest.mark.parametrize('seed', range(3))
    def test_matches_pair_sum(self, seed):
        graph, features, raw = _instance(seed, n=6, k=2)
        a, d = graph.adjacency, graph.degrees
        s = softplus(raw)
        f = features / np.sqrt(d)[:, None]
        expected = 0.0
        for x in range(6):
            logits = np.array([np.sum(f[x] * s * f[y]) for y in range(6)])
            denominator = logsumexp(logits, b=d)
            for y in range(6):
                expected -= a[x, y] * (logits[y] - denominator)
        expected += float(np.sum((features.T @ features - np.eye(2)) ** 2))
        value = tri_infonce_loss(normalize(graph), d, features, raw, 1.0).value
        assert value == pytest.approx(expected, abs=1e-10)

    def test_zero_features(self):
        graph, features, raw = _instance(4)
        value = tri_infonce_loss(normalize(graph), graph.degrees, np.zeros_like(features), raw, 0.7).value
        assert value == pytest.approx(0.7 * 3, abs=1e-12)

    def test_large_logits_stay_finite(self):
        graph, features, raw = _instance(0)
        result = tri_infonce_loss(normalize(graph), graph.degrees, features * 300.0, raw + 5.0, 0.0)
        assert np.isfinite(result.value)
        assert np.all(np.isfinite(result.grad_features))

    @pytest.mark.parametrize('seed', INSTANCES)
    def test_gradient(self, seed):
        graph, features, raw = _instance(seed)
        a_bar = normalize(graph)
        result = finite_difference_check(
            lambda p: tri_infonce_loss(a_bar, graph.degrees, p['features'], p['raw_importance'], 1.0),
            {'features': features, 'raw_importance': raw})
        assert result.passed(1e-4)


class TestTriclip:
    def _instance(self, seed):
        rng = np.random.default_rng(seed)
        joint = rng.dirichlet(np.ones(7 * 5)).reshape(7, 5)
        p_bar = normalize_bipartite(bipartite_from_joint(joint))
        return (p_bar, rng.normal(0.0, 0.4, (7, 3)), rng.normal(0.0, 0.4, (5, 3)),
                rng.normal(0.0, 0.5, 3))

    def test_value_is_shifted_factorization_error(self):
        p_bar, fa, fb, raw = self._instance(0)
        s = softplus(raw)
        expected = (np.sum((p_bar - (fa * s) @ fb.T) ** 2) - np.sum(p_bar ** 2)
                    + np.sum((fa.T @ fa - np.eye(3)) ** 2) + np.sum((fb.T @ fb - np.eye(3)) ** 2))
        assert triclip_loss(p_bar, fa, fb, raw, 1.0).value == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize('seed', range(5))
    def test_shared_tables_reduce_to_tricl(self, seed):
        """A = B 且两侧共用特征表时, 比 triCL 多一份去相关惩罚"""
        graph, features, raw = _instance(seed, n=10, k=3)
        a_bar = normalize(graph)
        shared = triclip_loss(a_bar.matrix, features, features, raw, 0.6).value
        expected = tricl_loss(a_bar, features, raw, 0.6).value + 0.6 * dec_penalty(features).value
        assert shared == pytest.approx(expected, abs=1e-12)

    def test_gradient_keys(self):
        p_bar, fa, fb, raw = self._instance(1)
        result = triclip_loss(p_bar, fa, fb, raw, 1.0)
        assert result.grad_features.shape == fa.shape
        assert result.grad_paired_features.shape == fb.shape
        assert result.grad_raw_importance.shape == raw.shape

    def test_dimension_mismatch(self):
        p_bar, fa, fb, raw = self._instance(0)
        with pytest.raises(LossInputError):
            triclip_loss(p_bar, fa, fb[:, :2], raw)

    @pytest.mark.parametrize('seed', INSTANCES)
    def test_gradient(self, seed):
        p_bar, fa, fb, raw = self._instance(seed)
        result = finite_difference_check(
            lambda p: triclip_loss(p_bar, p['features'], p['paired_features'], p['raw_importance'], 1.0),
            {'features': fa, 'paired_features': fb, 'raw_importance': raw})
        assert result.passed(1e-5)


class TestTriMSE:
    def test_shared_tables(self):
        """目标表与在线表相同且 s = 1 时, 损失为 2 - 2Σ A∘(ĝĝᵀ)"""
        graph, features, _ = _instance(0)
        a_bar = normalize(graph)
        raw = np.full(3, np.log(np.e - 1.0))
        value = trimse_loss(a_bar, graph.degrees, features, features, raw, 0.0).value
        unit = features / np.linalg.norm(features, axis=1, keepdims=True)
        expected = 2.0 - 2.0 * float(np.sum(graph.adjacency * (unit @ unit.T)))
        assert value == pytest.approx(expected, abs=1e-12)

    def test_zero_row_error(self):
        graph, features, raw = _instance(0)
        features[2] = 0.0
        with pytest.raises(LossInputError):
            trimse_loss(normalize(graph), graph.degrees, features, features + 1.0, raw)

    @pytest.mark.parametrize('seed', INSTANCES)
    def test_gradient(self, seed):
        graph, features, raw = _instance(seed)
        target = np.random.default_rng(seed + 100).normal(0.0, 0.3, features.shape)
        a_bar = normalize(graph)
        result = finite_difference_check(
            lambda p: trimse_loss(a_bar, graph.degrees, p['features'], target, p['raw_importance'], 1.0),
            {'features': features, 'raw_importance': raw})
        assert result.passed(1e-5)


class TestGradientCheck:
    def test_relative_error_floor(self):
        assert relative_error(1e-6, 0.0) == pytest.approx(1e-3)
        assert relative_error(2.0, 1.0) == pytest.approx(0.5)

    def test_detects_wrong_gradient(self):
        def broken(p):
            value = scl_loss(np.eye(2) * 0.5, p['features'])
            value.grads['features'] = value.grads['features'] * 1.1
            return value
        result = finite_difference_check(broken, {'features': np.ones((2, 2))})
        assert not result.passed(1e-5)
        assert result.worst_parameter == 'features'

    def test_subset_when_large(self):
        features = np.random.default_rng(0).normal(size=(30, 20))
        result = finite_difference_check(lambda p: dec_penalty(p['features']), {'features': features})
        assert result.checked_coordinates == 200

    def test_eps_range(self):
        with pytest.raises(LossInputError):
            finite_difference_check(lambda p: dec_penalty(p['features']), {'features': np.ones((2, 2))},
                                    eps=1e-2)
