"""下游评估: 线性探针、k-NN、检索 mAP"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..config import Config
from ..exceptions import EvaluationError
from ..utils.helpers import derive_rng


def _labels_and_weights(features: np.ndarray, labels: Sequence[int],
                        weights: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    y = np.asarray(labels)
    if y.shape != (features.shape[0],):
        raise EvaluationError(f"标签长度 {y.shape} 与样本数 {features.shape[0]} 不一致")
    classes, codes = np.unique(y, return_inverse=True)
    if weights is None:
        w = np.full(features.shape[0], 1.0 / features.shape[0])
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (features.shape[0],) or np.any(w < 0) or w.sum() <= 0:
            raise EvaluationError("样本权重必须为非负且长度与样本数一致")
    return classes, codes, w


def linear_probe(features: np.ndarray,
                 labels: Sequence[int],
                 weights: Optional[np.ndarray] = None,
                 ridge: float = Config.RIDGE) -> float:
    """
    加权岭回归线性探针(无截距, 独热目标, argmax 判别)

    Args:
        features: N×m 特征
        weights: 样本权重(通常为度 d), 缺省为均匀
    Returns:
        加权 0-1 错误率
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise EvaluationError(f"特征必须为 N×m (m >= 1), 实际 {x.shape}")
    classes, codes, w = _labels_and_weights(x, labels, weights)
    if classes.size < 2:
        raise EvaluationError("线性探针至少需要两个类别")

    onehot = np.eye(classes.size)[codes]
    gram = x.T @ (x * w[:, None]) + ridge * np.eye(x.shape[1])
    rhs = x.T @ (onehot * w[:, None])
    if ridge == 0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise EvaluationError("法方程奇异, 请设置 ridge > 0 (默认 1e-6)")
    try:
        coef = linalg.solve(gram, rhs, assume_a='pos')
    except linalg.LinAlgError as e:
        raise EvaluationError(f"法方程求解失败, 请设置 ridge > 0: {e}") from e

    predicted = np.argmax(x @ coef, axis=1)
    return float(np.sum(w * (predicted != codes)) / np.sum(w))


def _unit_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.where(norms > 0, norms, 1.0)


def _ranking(x: np.ndarray) -> np.ndarray:
    """按余弦相似度降序的邻居下标(排除自身, 并列取小下标)"""
    unit = _unit_rows(x)
    sims = unit @ unit.T
    np.fill_diagonal(sims, -np.inf)
    order = np.argsort(-sims, axis=1, kind='stable')
    return order[:, :-1]


def consecutive_blocks(k: int, width: int) -> List[Tuple[int, int]]:
    """[0,w), [w,2w), ... 末块可不足 w"""
    if k < 1 or width < 1:
        raise EvaluationError(f"k 与 width 必须 >= 1: k={k}, width={width}")
    return [(start, min(start + width, k)) for start in range(0, k, width)]


def knn_eval(features: np.ndarray,
             labels: Sequence[int],
             dim_blocks: Sequence[Tuple[int, int]],
             neighbors: int = Config.KNN_NEIGHBORS) -> List[Tuple[str, float]]:
    """
    留一法余弦 k-NN, 每个维度块单独评估

    多数投票, 票数并列时取最小类别.
    Returns:
        [(块标签 "start-stop", 准确率)]
    """
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= neighbors < n:
        raise EvaluationError(f"neighbors 必须在 [1, {n}): {neighbors}")
    classes, codes, _ = _labels_and_weights(x, labels, None)

    results = []
    for start, stop in dim_blocks:
        if not 0 <= start < stop <= x.shape[1]:
            raise EvaluationError(f"维度块越界: [{start}, {stop})")
        nearest = _ranking(x[:, start:stop])[:, :neighbors]
        votes = np.zeros((n, classes.size))
        np.add.at(votes, (np.repeat(np.arange(n), neighbors), codes[nearest].ravel()), 1.0)
        predicted = np.argmax(votes, axis=1)
        results.append((f"{start + 1}-{stop}", float(np.mean(predicted == codes))))
    return results


def retrieval_map(features: np.ndarray,
                  labels: Sequence[int],
                  top_r: int = Config.RETRIEVAL_TOP_R) -> float:
    """余弦检索 mAP@top_r: 每个查询在前 top_r 个结果中按同类命中计算平均精度"""
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= top_r < n:
        raise EvaluationError(f"top_r 必须在 [1, {n}): {top_r}")
    _, codes, _ = _labels_and_weights(x, labels, None)

    retrieved = _ranking(x)[:, :top_r]
    hits = (codes[retrieved] == codes[:, None]).astype(np.float64)
    ranks = np.arange(1, top_r + 1, dtype=np.float64)
    precision = np.cumsum(hits, axis=1) / ranks * hits
    ap = precision.sum(axis=1) / np.maximum(hits.sum(axis=1), 1.0)
    return float(ap.mean())


def _random_subsets(k: int, m: int, trials: int, seed: int):
    if not 1 <= m <= k:
        raise EvaluationError(f"m 必须在 [1, {k}]: {m}")
    if trials < 1:
        raise EvaluationError("trials 必须 >= 1")
    for trial in range(trials):
        rng = derive_rng(seed, trial)
        yield np.sort(rng.choice(k, size=m, replace=False))


def scl_random_subset_eval(features: np.ndarray,
                           labels: Sequence[int],
                           m: int,
                           trials: int,
                           seed: int,
                           weights: Optional[np.ndarray] = None,
                           ridge: float = Config.RIDGE) -> float:
    """随机选取 m 维的平均线性探针错误率(每次试验的生成器由 (seed, trial) 派生)"""
    x = np.asarray(features, dtype=np.float64)
    errors = [linear_probe(x[:, subset], labels, weights, ridge)
              for subset in _random_subsets(x.shape[1], m, trials, seed)]
    return float(np.mean(errors))


def random_subset_retrieval(features: np.ndarray,
                            labels: Sequence[int],
                            m: int,
                            trials: int,
                            seed: int,
                            top_r: int = Config.RETRIEVAL_TOP_R) -> float:
    """随机选取 m 维的平均检索 mAP"""
    x = np.asarray(features, dtype=np.float64)
    scores = [retrieval_map(x[:, subset], labels, top_r)
              for subset in _random_subsets(x.shape[1], m, trials, seed)]
    return float(np.mean(scores))


def dimension_block_probe(features: np.ndarray,
                          labels: Sequence[int],
                          m: int,
                          weights: Optional[np.ndarray] = None,
                          ridge: float = Config.RIDGE) -> Dict[str, float]:
    """排序后前/中/后 m 维的线性探针错误率"""
    x = np.asarray(features, dtype=np.float64)
    k = x.shape[1]
    if not 1 <= m <= k:
        raise EvaluationError(f"m 必须在 [1, {k}]: {m}")
    middle = (k - m) // 2
    return {
        'top': linear_probe(x[:, :m], labels, weights, ridge),
        'middle': linear_probe(x[:, middle:middle + m], labels, weights, ridge),
        'bottom': linear_probe(x[:, k - m:], labels, weights, ridge),
    }
