"""非对称三因子损失: triCLIP 与 tri-MSE"""
from typing import Union

import numpy as np

from ..config import Config
from ..exceptions import LossInputError
from ..graph import denormalize
from ..models import LossValueAndGradient, NormalizedAdjacency
from ..utils.helpers import sigmoid, softplus
from .base import (check_degrees, check_features, check_importance,
                   check_penalty, decorrelation, matrix_of)


def triclip_loss(p_bar: np.ndarray,
                 features_a: np.ndarray,
                 features_b: np.ndarray,
                 raw_importance: np.ndarray,
                 penalty_weight: float = Config.PENALTY_WEIGHT) -> LossValueAndGradient:
    """
    ‖P̄_O - F_A S F_Bᵀ‖² - ‖P̄_O‖² + λ(‖F_AᵀF_A - I‖² + ‖F_BᵀF_B - I‖²)

    梯度键: features (A 侧), paired_features (B 侧), raw_importance.
    """
    p = matrix_of(p_bar, 'P̄_O')
    fa = check_features(features_a, p.shape[0], 'F_A')
    fb = check_features(features_b, p.shape[1], 'F_B')
    if fa.shape[1] != fb.shape[1]:
        raise LossInputError(f"F_A 与 F_B 维度不一致: {fa.shape[1]} vs {fb.shape[1]}")
    raw = check_importance(raw_importance, fa.shape[1])
    weight = check_penalty(penalty_weight)

    s = softplus(raw)
    gram_a = fa.T @ fa
    gram_b = fb.T @ fb
    to_a = p @ fb
    to_b = p.T @ fa
    cross = np.sum(fa * to_a, axis=0)
    gram_prod = gram_a * gram_b
    value = float(s @ gram_prod @ s) - 2.0 * float(s @ cross)

    grad_a = 2.0 * ((fa * s) @ gram_b * s[None, :] - to_a * s[None, :])
    grad_b = 2.0 * ((fb * s) @ gram_a * s[None, :] - to_b * s[None, :])
    grad_s = 2.0 * (gram_prod @ s) - 2.0 * cross

    penalty_a, grad_pa = decorrelation(fa, weight)
    penalty_b, grad_pb = decorrelation(fb, weight)
    return LossValueAndGradient(value=value + penalty_a + penalty_b,
                                grads={'features': grad_a + grad_pa,
                                       'paired_features': grad_b + grad_pb,
                                       'raw_importance': grad_s * sigmoid(raw)})


def _row_unit(features: np.ndarray, name: str):
    norms = np.linalg.norm(features, axis=1)
    dead = np.flatnonzero(norms <= 0)
    if dead.size:
        raise LossInputError(f"{name} 存在零范数行: {dead.tolist()}")
    return features / norms[:, None], norms


def trimse_loss(a_bar: Union[NormalizedAdjacency, np.ndarray],
                degrees: np.ndarray,
                features_online: np.ndarray,
                features_target: np.ndarray,
                raw_importance: np.ndarray,
                penalty_weight: float = Config.PENALTY_WEIGHT) -> LossValueAndGradient:
    """
    2 - 2Σ A_{x,x⁺} g(x)ᵀS f(x⁺) / (‖g(x)‖‖f(x⁺)‖) + λ‖F_onᵀF_on - I‖²

    目标表视为常数(停止梯度); 行归一化后 sqrt(d) 缩放相互抵消.
    """
    a_norm = matrix_of(a_bar)
    n = a_norm.shape[0]
    d = check_degrees(degrees, n)
    online = check_features(features_online, n, 'F_online')
    target = check_features(features_target, n, 'F_target')
    if online.shape != target.shape:
        raise LossInputError(f"在线表与目标表形状不一致: {online.shape} vs {target.shape}")
    raw = check_importance(raw_importance, online.shape[1])
    weight = check_penalty(penalty_weight)

    s = softplus(raw)
    a = denormalize(a_norm, d)
    g_hat, g_norm = _row_unit(online, 'F_online')
    f_hat, _ = _row_unit(target, 'F_target')

    pulled = a @ f_hat
    value = 2.0 - 2.0 * float(np.sum(g_hat * pulled * s[None, :]))

    # 对单位向量的梯度投影到切空间
    h = -2.0 * pulled * s[None, :]
    radial = np.sum(h * g_hat, axis=1, keepdims=True)
    grad_online = (h - radial * g_hat) / g_norm[:, None]
    grad_s = -2.0 * np.sum(g_hat * pulled, axis=0)

    penalty, grad_penalty = decorrelation(online, weight)
    return LossValueAndGradient(value=value + penalty,
                                grads={'features': grad_online + grad_penalty,
                                       'raw_importance': grad_s * sigmoid(raw)})
