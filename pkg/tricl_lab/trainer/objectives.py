"""训练目标: 将损失函数与图、采样方式绑定"""
from abc import ABC, abstractmethod
from typing import Dict, Tuple, Type, Union

import numpy as np

from ..config import TrainConfig
from ..exceptions import ConfigurationError
from ..graph import normalize, normalize_bipartite
from ..losses import (draw_batch, scl_loss, tricl_loss, tri_infonce_loss,
                      triclip_loss, trimse_loss, sampled_scl_loss,
                      sampled_tricl_loss, sampled_tri_infonce_loss,
                      sampled_triclip_loss, sampled_trimse_loss)
from ..losses.sampled import PairBatch
from ..models import AugmentationGraph, BipartiteGraph, EmbeddingModel, LossValueAndGradient

Params = Dict[str, np.ndarray]


class BaseObjective(ABC):
    """训练目标基类"""

    trainable: Tuple[str, ...] = ('features', 'raw_importance')

    def __init__(self, graph: AugmentationGraph, config: TrainConfig):
        if not isinstance(graph, AugmentationGraph):
            raise ConfigurationError(f"损失 {config.loss_kind} 需要对称增强图")
        self.graph = graph
        self.config = config
        self.normalized = normalize(graph)
        self.degrees = graph.degrees

    @property
    def rows(self) -> int:
        return self.graph.n_nodes

    @property
    def paired_rows(self) -> int:
        return 0

    def parameters(self, model: EmbeddingModel) -> Params:
        """模型 → 参数字典(副本)"""
        params = {'features': model.features.copy(), 'raw_importance': model.raw_importance.copy()}
        if model.paired_features is not None:
            params['paired_features'] = model.paired_features.copy()
        return params

    def to_model(self, params: Params) -> EmbeddingModel:
        return EmbeddingModel(features=params['features'].copy(),
                              raw_importance=params['raw_importance'].copy(),
                              paired_features=None if 'paired_features' not in params
                              else params['paired_features'].copy())

    def draw(self, rng: np.random.Generator) -> PairBatch:
        return draw_batch(rng, self.graph.adjacency, self.config.batch_pairs,
                          self.degrees, self.degrees)

    def evaluate(self, params: Params, rng: np.random.Generator = None) -> LossValueAndGradient:
        """按训练模式求值"""
        if self.config.mode == 'sampled':
            return self.sampled(params, self.draw(rng))
        return self.exact(params)

    def after_step(self, params: Params) -> None:
        """参数更新后的钩子"""
        pass

    @abstractmethod
    def exact(self, params: Params) -> LossValueAndGradient:
        pass

    @abstractmethod
    def sampled(self, params: Params, batch: PairBatch) -> LossValueAndGradient:
        pass


class SCLObjective(BaseObjective):
    """两因子 SCL, 仅训练特征"""

    trainable = ('features',)

    def exact(self, params):
        return scl_loss(self.normalized, params['features'])

    def sampled(self, params, batch):
        return sampled_scl_loss(self.degrees, params['features'], batch)


class TriCLObjective(BaseObjective):
    def exact(self, params):
        return tricl_loss(self.normalized, params['features'], params['raw_importance'],
                          self.config.penalty_weight)

    def sampled(self, params, batch):
        return sampled_tricl_loss(self.degrees, params['features'], params['raw_importance'],
                                  batch, self.config.penalty_weight)


class TriInfoNCEObjective(BaseObjective):
    def exact(self, params):
        return tri_infonce_loss(self.normalized, self.degrees, params['features'],
                                params['raw_importance'], self.config.penalty_weight)

    def sampled(self, params, batch):
        return sampled_tri_infonce_loss(self.degrees, params['features'], params['raw_importance'],
                                        batch, self.config.penalty_weight)


class TriMSEObjective(BaseObjective):
    """在线表梯度训练, 目标表为在线表的指数滑动平均"""

    def parameters(self, model):
        params = super().parameters(model)
        if 'paired_features' not in params:
            params['paired_features'] = model.features.copy()
        return params

    def exact(self, params):
        return trimse_loss(self.normalized, self.degrees, params['features'],
                           params['paired_features'], params['raw_importance'],
                           self.config.penalty_weight)

    def sampled(self, params, batch):
        return sampled_trimse_loss(params['features'], params['paired_features'],
                                   params['raw_importance'], batch, self.config.penalty_weight)

    def after_step(self, params):
        tau = self.config.ema_coefficient
        params['paired_features'] *= tau
        params['paired_features'] += (1.0 - tau) * params['features']


class TriCLIPObjective(BaseObjective):
    """双编码器非对称目标"""

    trainable = ('features', 'paired_features', 'raw_importance')

    def __init__(self, graph: BipartiteGraph, config: TrainConfig):
        if not isinstance(graph, BipartiteGraph):
            raise ConfigurationError("triclip 需要双模态图")
        self.graph = graph
        self.config = config
        self.normalized = normalize_bipartite(graph)
        self.degrees = graph.marginal_a

    @property
    def rows(self) -> int:
        return self.graph.shape[0]

    @property
    def paired_rows(self) -> int:
        return self.graph.shape[1]

    def draw(self, rng):
        return draw_batch(rng, self.graph.joint, self.config.batch_pairs,
                          self.graph.marginal_a, self.graph.marginal_b)

    def exact(self, params):
        return triclip_loss(self.normalized, params['features'], params['paired_features'],
                            params['raw_importance'], self.config.penalty_weight)

    def sampled(self, params, batch):
        return sampled_triclip_loss(self.graph.marginal_a, self.graph.marginal_b,
                                    params['features'], params['paired_features'],
                                    params['raw_importance'], batch, self.config.penalty_weight)


OBJECTIVES: Dict[str, Type[BaseObjective]] = {
    'scl': SCLObjective,
    'tricl': TriCLObjective,
    'tri_infonce': TriInfoNCEObjective,
    'triclip': TriCLIPObjective,
    'trimse': TriMSEObjective,
}


def build_objective(graph: Union[AugmentationGraph, BipartiteGraph], config: TrainConfig) -> BaseObjective:
    return OBJECTIVES[config.loss_kind](graph, config)
