"""
谱对比损失(SCL)与三因子对比损失(triCL)

所有损失均为精确期望形式, 并减去常数 ‖Ā‖²:
    SCL   = ‖Ā - FFᵀ‖² - ‖Ā‖²
    triCL = ‖Ā - F diag(s) Fᵀ‖² - ‖Ā‖² + λ‖FᵀF - I‖²
其中 F_x = sqrt(d_x) f(x), s = softplus(raw).
"""
from typing import Union

import numpy as np

from ..config import Config
from ..models import LossValueAndGradient, NormalizedAdjacency
from ..utils.helpers import sigmoid, softplus
from .base import (check_features, check_importance, check_penalty,
                   decorrelation, matrix_of)


def scl_loss(a_bar: Union[NormalizedAdjacency, np.ndarray], features: np.ndarray) -> LossValueAndGradient:
    """SCL: ‖FᵀF‖² - 2 tr(FᵀĀF), 梯度 4F(FᵀF) - 4ĀF"""
    a = matrix_of(a_bar)
    f = check_features(features, a.shape[0])
    gram = f.T @ f
    propagated = a @ f
    value = float(np.sum(gram ** 2)) - 2.0 * float(np.sum(f * propagated))
    grad = 4.0 * (f @ gram) - 4.0 * propagated
    return LossValueAndGradient(value=value, grads={'features': grad})


def dec_penalty(features: np.ndarray) -> LossValueAndGradient:
    """去相关惩罚 ‖FᵀF - I‖²"""
    f = np.asarray(features, dtype=np.float64)
    value, grad = decorrelation(f)
    return LossValueAndGradient(value=value, grads={'features': grad})


def tri_term(a: np.ndarray, f: np.ndarray, s: np.ndarray):
    """sᵀ(G∘G)s - 2Σ s_j (FᵀĀF)_jj 及其对 F, s 的梯度"""
    gram = f.T @ f
    propagated = a @ f
    diag_cross = np.sum(f * propagated, axis=0)
    gram_sq = gram ** 2
    value = float(s @ gram_sq @ s) - 2.0 * float(s @ diag_cross)
    grad_f = 4.0 * ((f * s) @ gram * s[None, :] - propagated * s[None, :])
    grad_s = 2.0 * (gram_sq @ s) - 2.0 * diag_cross
    return value, grad_f, grad_s


def tricl_loss(a_bar: Union[NormalizedAdjacency, np.ndarray],
               features: np.ndarray,
               raw_importance: np.ndarray,
               penalty_weight: float = Config.PENALTY_WEIGHT) -> LossValueAndGradient:
    """triCL 损失, 梯度经 softplus 传到 raw_importance"""
    a = matrix_of(a_bar)
    f = check_features(features, a.shape[0])
    raw = check_importance(raw_importance, f.shape[1])
    weight = check_penalty(penalty_weight)

    s = softplus(raw)
    value, grad_f, grad_s = tri_term(a, f, s)
    penalty, grad_penalty = decorrelation(f, weight)
    return LossValueAndGradient(value=value + penalty,
                                grads={'features': grad_f + grad_penalty,
                                       'raw_importance': grad_s * sigmoid(raw)})
