"""优化器"""
from abc import ABC, abstractmethod
from typing import Dict

import numpy as np

from ..config import Config, TrainConfig


class BaseOptimizer(ABC):
    """优化器基类, 原地更新参数字典"""

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    @abstractmethod
    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        """执行一步更新"""
        pass


class MomentumOptimizer(BaseOptimizer):
    """重球动量梯度下降: v ← μv - ηg, p ← p + v"""

    def __init__(self, learning_rate: float, momentum: float = Config.MOMENTUM):
        super().__init__(learning_rate)
        self.momentum = momentum
        self.velocity: Dict[str, np.ndarray] = {}

    def step(self, params, grads):
        for name, grad in grads.items():
            v = self.velocity.get(name)
            if v is None:
                v = np.zeros_like(params[name])
            v = self.momentum * v - self.learning_rate * grad
            self.velocity[name] = v
            params[name] += v


class AdamOptimizer(BaseOptimizer):
    """逐坐标自适应步长(Adam)"""

    def __init__(self, learning_rate: float,
                 betas=Config.ADAM_BETAS,
                 eps: float = Config.ADAM_EPS):
        super().__init__(learning_rate)
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.first: Dict[str, np.ndarray] = {}
        self.second: Dict[str, np.ndarray] = {}

    def step(self, params, grads):
        self.t += 1
        for name, grad in grads.items():
            m = self.first.get(name, np.zeros_like(grad))
            v = self.second.get(name, np.zeros_like(grad))
            m = self.beta1 * m + (1.0 - self.beta1) * grad
            v = self.beta2 * v + (1.0 - self.beta2) * grad ** 2
            self.first[name], self.second[name] = m, v
            m_hat = m / (1.0 - self.beta1 ** self.t)
            v_hat = v / (1.0 - self.beta2 ** self.t)
            params[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def build_optimizer(config: TrainConfig) -> BaseOptimizer:
    if config.optimizer == 'adaptive':
        return AdamOptimizer(config.learning_rate)
    return MomentumOptimizer(config.learning_rate, config.momentum)
