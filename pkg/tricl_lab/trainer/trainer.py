"""训练循环、符号规范化与重要性排序"""
import dataclasses
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..config import Config, TrainConfig
from ..exceptions import CanonicalizationError, EvaluationError, TrainingDivergenceError
from ..models import AugmentationGraph, BipartiteGraph, EmbeddingModel, TrainedModel
from ..utils.helpers import derive_rng, softplus_inverse
from ..utils.logger import get_logger
from .objectives import build_objective
from .optimizers import build_optimizer

logger = get_logger()

# softplus(ln(e-1)) = 1
UNIT_RAW_IMPORTANCE = float(softplus_inverse(1.0))


def init_model(n: int, k: int, seed: int,
               init_scale: Optional[float] = None,
               paired_rows: int = 0) -> EmbeddingModel:
    """
    随机初始化表格式编码器

    F 元素 ~ N(0, init_scale²/k); init_scale 缺省为 sqrt(k/n), 使列范数约为 1.
    raw_importance 全部取 ln(e-1), 初始 s_j = 1.
    """
    rng = np.random.default_rng(seed)
    scale = np.sqrt(k / n) if init_scale is None else float(init_scale)
    features = rng.normal(0.0, scale / np.sqrt(k), (n, k))
    paired = None
    if paired_rows:
        paired_scale = np.sqrt(k / paired_rows) if init_scale is None else float(init_scale)
        paired = rng.normal(0.0, paired_scale / np.sqrt(k), (paired_rows, k))
    return EmbeddingModel(features=features,
                          raw_importance=np.full(k, UNIT_RAW_IMPORTANCE),
                          paired_features=paired)


def divergence_threshold(initial_loss: float) -> float:
    """发散阈值 1e6·max(|初始损失|, 1); 初始损失可能恰为 0"""
    return Config.DIVERGENCE_FACTOR * max(abs(float(initial_loss)), 1.0)


def train(graph: Union[AugmentationGraph, BipartiteGraph], config: TrainConfig) -> TrainedModel:
    """
    按配置最小化损失

    精确模式使用全期望梯度; 采样模式每步抽取 batch_pairs 个正/负样本对.
    损失超过 1e6·max(|初始损失|, 1) 或非有限时中止.
    """
    objective = build_objective(graph, config)
    model = init_model(objective.rows, config.k, config.seed, config.init_scale,
                       paired_rows=objective.paired_rows)
    params = objective.parameters(model)
    optimizer = build_optimizer(config)
    sampler = derive_rng(config.seed, 1)

    logger.info(f"开始训练: loss={config.loss_kind}, mode={config.mode}, k={config.k}, "
                f"steps={config.steps}, seed={config.seed}")
    history: List[float] = []
    threshold = None
    for step in range(config.steps):
        result = objective.evaluate(params, sampler)
        value = result.value
        if threshold is None:
            threshold = divergence_threshold(value)
        if not np.isfinite(value) or value > threshold:
            raise TrainingDivergenceError(
                f"训练发散: 第 {step} 步损失 {value!r} 超过阈值 {threshold!r} "
                f"(初始损失 {history[0] if history else value!r}, lr={config.learning_rate})")
        history.append(value)

        optimizer.step(params, {name: result.grads[name] for name in objective.trainable})
        objective.after_step(params)

        if (step + 1) % Config.LOG_EVERY == 0:
            logger.debug(f"step {step + 1}: loss={value:.10f}")

    final = objective.exact(params).value
    logger.info(f"训练完成: 最终损失 {final:.10f}")
    return TrainedModel(model=objective.to_model(params), config=config,
                        history=history, final_loss=final)


def _anchor_flips(values: np.ndarray, tol: float) -> Tuple[List[int], np.ndarray]:
    """每维锚点为首个 |f_j| > tol 的样本; 锚点值为正则翻转"""
    alive = np.abs(values) > tol
    dead = np.flatnonzero(~alive.any(axis=0))
    if dead.size:
        raise CanonicalizationError(f"存在死维度(所有 |f_j| <= {tol}): {dead.tolist()}")
    anchors = [int(np.argmax(alive[:, j])) for j in range(values.shape[1])]
    flips = np.array([-1.0 if values[a, j] > 0 else 1.0 for j, a in enumerate(anchors)])
    return anchors, flips


def canonicalize_columns(features: np.ndarray,
                         tol: float = Config.ANCHOR_TOLERANCE,
                         partner: Optional[np.ndarray] = None):
    """
    对裸特征矩阵应用锚点符号规则, 使每维锚点坐标为负

    Returns:
        (features, partner, anchors); partner 按相同翻转处理
    """
    values = np.asarray(features, dtype=np.float64)
    anchors, flips = _anchor_flips(values, tol)
    flipped_partner = None if partner is None else np.asarray(partner) * flips[None, :]
    return values * flips[None, :], flipped_partner, anchors


def is_canonical(features: np.ndarray, tol: float = Config.ANCHOR_TOLERANCE) -> bool:
    """每维锚点坐标均为负"""
    values = np.asarray(features, dtype=np.float64)
    try:
        anchors, _ = _anchor_flips(values, tol)
    except CanonicalizationError:
        return False
    return all(values[a, j] < 0 for j, a in enumerate(anchors))


def _degrees_of(graph: Union[AugmentationGraph, BipartiteGraph]) -> np.ndarray:
    return graph.marginal_a if isinstance(graph, BipartiteGraph) else graph.degrees


def canonicalize_signs(trained: TrainedModel,
                       graph: Union[AugmentationGraph, BipartiteGraph]) -> TrainedModel:
    """符号规范化: f̄_j = (-1)^{1[f_j(x_0j) > 0]} f_j, 配对表同步翻转"""
    model = trained.model
    encoder = model.encoder_features(_degrees_of(graph))
    anchors, flips = _anchor_flips(encoder, trained.config.anchor_tolerance)
    paired = None if model.paired_features is None else model.paired_features * flips[None, :]
    canonical = EmbeddingModel(features=model.features * flips[None, :],
                               raw_importance=model.raw_importance.copy(),
                               paired_features=paired)
    flipped = int(np.sum(flips < 0))
    logger.debug(f"符号规范化: 翻转 {flipped}/{len(flips)} 维")
    return dataclasses.replace(trained, model=canonical, canonicalized=True, anchors=anchors)


def sort_by_importance(trained: TrainedModel) -> TrainedModel:
    """按 s 降序置换维度, 并列时保持原顺序"""
    model = trained.model
    order = np.argsort(-model.importance, kind='stable')
    permuted = EmbeddingModel(features=model.features[:, order],
                              raw_importance=model.raw_importance[order],
                              paired_features=None if model.paired_features is None
                              else model.paired_features[:, order])
    anchors = [trained.anchors[i] for i in order] if trained.anchors else []
    return dataclasses.replace(trained, model=permuted, anchors=anchors,
                               sorted=True, permutation=order.tolist())


def select_top_features(trained: TrainedModel, m: int,
                        degrees: Optional[np.ndarray] = None) -> np.ndarray:
    """
    取前 m 维特征 f^(m)

    给定 degrees 时返回编码器输出 f = F/sqrt(d), 否则返回缩放特征 F.
    """
    if not (trained.sorted and trained.canonicalized):
        raise CanonicalizationError("选择特征前需先规范化符号并按重要性排序")
    k = trained.model.k
    if not 1 <= m <= k:
        raise EvaluationError(f"m 必须在 [1, {k}]: {m}")
    values = trained.model.features if degrees is None else trained.model.encoder_features(degrees)
    return values[:, :m]


def model_to_dict(trained: TrainedModel) -> Dict[str, Any]:
    """TrainedModel → JSON 对象"""
    model = trained.model
    data = {
        'F': model.features.tolist(),
        'raw_importance': model.raw_importance.tolist(),
        's': model.importance.tolist(),
        'anchors': list(trained.anchors),
        'config': trained.config.to_dict(),
        'history': list(trained.history),
        'final_loss': trained.final_loss,
        'canonicalized': trained.canonicalized,
        'sorted': trained.sorted,
        'permutation': list(trained.permutation),
    }
    if model.paired_features is not None:
        data['paired_F'] = model.paired_features.tolist()
    return data


def model_from_dict(data: Dict[str, Any]) -> TrainedModel:
    """JSON 对象 → TrainedModel"""
    paired = data.get('paired_F')
    model = EmbeddingModel(features=np.asarray(data['F'], dtype=np.float64),
                           raw_importance=np.asarray(data['raw_importance'], dtype=np.float64),
                           paired_features=None if paired is None else np.asarray(paired, dtype=np.float64))
    return TrainedModel(model=model,
                        config=TrainConfig.from_dict(data.get('config')),
                        history=[float(v) for v in data.get('history', [])],
                        final_loss=float(data.get('final_loss', float('nan'))),
                        canonicalized=bool(data.get('canonicalized', False)),
                        anchors=[int(a) for a in data.get('anchors', [])],
                        sorted=bool(data.get('sorted', False)),
                        permutation=[int(p) for p in data.get('permutation', [])])
