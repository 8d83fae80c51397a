"""损失函数公共校验与去相关惩罚"""
from typing import Tuple, Union

import numpy as np

from ..exceptions import LossInputError
from ..models import NormalizedAdjacency


def matrix_of(target: Union[NormalizedAdjacency, np.ndarray], name: str = 'Ā') -> np.ndarray:
    """取出归一化矩阵"""
    matrix = target.matrix if isinstance(target, NormalizedAdjacency) else np.asarray(target, dtype=np.float64)
    if matrix.ndim != 2:
        raise LossInputError(f"{name} 必须是二维矩阵, 实际维度 {matrix.ndim}")
    return matrix


def check_features(features: np.ndarray, n: int, name: str = 'F') -> np.ndarray:
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] != n:
        raise LossInputError(f"{name} 形状必须为 ({n}, k), 实际 {f.shape}")
    return f


def check_importance(raw_importance: np.ndarray, k: int) -> np.ndarray:
    raw = np.asarray(raw_importance, dtype=np.float64)
    if raw.shape != (k,):
        raise LossInputError(f"raw_importance 长度必须为 {k}, 实际 {raw.shape}")
    return raw


def check_penalty(penalty_weight: float) -> float:
    if penalty_weight < 0:
        raise LossInputError(f"去相关权重不能为负: {penalty_weight}")
    return float(penalty_weight)


def check_degrees(degrees: np.ndarray, n: int) -> np.ndarray:
    d = np.asarray(degrees, dtype=np.float64)
    if d.shape != (n,):
        raise LossInputError(f"度向量长度必须为 {n}, 实际 {d.shape}")
    if np.any(d <= 0):
        raise LossInputError("度向量必须全为正")
    return d


def decorrelation(features: np.ndarray, weight: float = 1.0) -> Tuple[float, np.ndarray]:
    """λ‖FᵀF - I‖² 及其梯度 4λF(FᵀF - I)"""
    gram = features.T @ features
    excess = gram - np.eye(gram.shape[0])
    return weight * float(np.sum(excess ** 2)), 4.0 * weight * (features @ excess)
