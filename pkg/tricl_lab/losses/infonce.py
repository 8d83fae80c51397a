"""三因子 InfoNCE 损失(精确期望形式)"""
from typing import Union

import numpy as np
from scipy.special import logsumexp

from ..config import Config
from ..graph import denormalize
from ..models import LossValueAndGradient, NormalizedAdjacency
from ..utils.helpers import sigmoid, softplus
from .base import (check_degrees, check_features, check_importance,
                   check_penalty, decorrelation, matrix_of)


def tri_infonce_loss(a_bar: Union[NormalizedAdjacency, np.ndarray],
                     degrees: np.ndarray,
                     features: np.ndarray,
                     raw_importance: np.ndarray,
                     penalty_weight: float = Config.PENALTY_WEIGHT) -> LossValueAndGradient:
    """
    L = -Σ A_{x,x⁺} log[exp(z(x,x⁺)) / Σ_{x⁻} d_{x⁻} exp(z(x,x⁻))] + λ‖FᵀF - I‖²

    z(x,x') = f(x)ᵀ S f(x'), f(x) = F_x / sqrt(d_x); 分母覆盖全部 x⁻ (含正样本).
    """
    a_norm = matrix_of(a_bar)
    n = a_norm.shape[0]
    d = check_degrees(degrees, n)
    big_f = check_features(features, n)
    raw = check_importance(raw_importance, big_f.shape[1])
    weight = check_penalty(penalty_weight)

    s = softplus(raw)
    a = denormalize(a_norm, d)
    f = big_f / np.sqrt(d)[:, None]
    logits = (f * s[None, :]) @ f.T
    # logsumexp 内部做最大值平移
    lse = logsumexp(logits, axis=1, b=d[None, :])
    value = -float(np.sum(a * logits)) + float(d @ lse)

    # ∂L/∂z = -A + diag(d) P, P_{x,x'} = d_{x'} exp(z - lse_x)
    softmax = d[None, :] * np.exp(logits - lse[:, None])
    weights = d[:, None] * softmax - a
    sym = weights + weights.T
    grad_small = (sym @ f) * s[None, :]
    grad_s = np.sum(f * (weights @ f), axis=0)

    penalty, grad_penalty = decorrelation(big_f, weight)
    grad_f = grad_small / np.sqrt(d)[:, None] + grad_penalty
    return LossValueAndGradient(value=value + penalty,
                                grads={'features': grad_f,
                                       'raw_importance': grad_s * sigmoid(raw)})
