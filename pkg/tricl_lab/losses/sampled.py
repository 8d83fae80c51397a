"""
小批量采样估计

正样本对 (x, x⁺) ~ A (或 P_O), 负样本对 (x, x⁻) ~ d⊗d (或 P_A⊗P_B).
SCL/triCL/triCLIP 的值与梯度估计均无偏; tri-InfoNCE 使用批内 log-mean-exp;
tri-MSE 只用正样本对. 去相关惩罚按精确值计算.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from ..config import Config
from ..exceptions import LossInputError
from ..models import LossValueAndGradient
from ..utils.helpers import sigmoid, softplus
from .base import (check_degrees, check_features, check_importance,
                   check_penalty, decorrelation)


@dataclass
class PairBatch:
    """一批样本对的下标"""
    positive_left: np.ndarray
    positive_right: np.ndarray
    negative_left: np.ndarray
    negative_right: np.ndarray

    @property
    def size(self) -> int:
        return int(self.positive_left.size)


def draw_batch(rng: np.random.Generator,
               joint: np.ndarray,
               batch_pairs: int,
               marginal_left: np.ndarray = None,
               marginal_right: np.ndarray = None) -> PairBatch:
    """从联合分布抽正样本对, 从边缘分布乘积抽负样本对"""
    if batch_pairs < 1:
        raise LossInputError(f"batch_pairs 必须 >= 1: {batch_pairs}")
    p = np.asarray(joint, dtype=np.float64)
    left_marginal = p.sum(axis=1) if marginal_left is None else np.asarray(marginal_left)
    right_marginal = p.sum(axis=0) if marginal_right is None else np.asarray(marginal_right)

    flat = p.ravel()
    picks = rng.choice(flat.size, size=batch_pairs, p=flat / flat.sum())
    pos_left, pos_right = np.unravel_index(picks, p.shape)
    neg_left = rng.choice(left_marginal.size, size=batch_pairs, p=left_marginal / left_marginal.sum())
    neg_right = rng.choice(right_marginal.size, size=batch_pairs, p=right_marginal / right_marginal.sum())
    return PairBatch(positive_left=pos_left, positive_right=pos_right,
                     negative_left=neg_left, negative_right=neg_right)


def _bilinear(left: np.ndarray, right: np.ndarray, s: np.ndarray,
              li: np.ndarray, ri: np.ndarray, coef: np.ndarray
              ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Σ_b coef_b · left[li_b]ᵀ S right[ri_b] 对 left, right, s 的梯度"""
    grad_left = np.zeros_like(left)
    grad_right = np.zeros_like(right)
    np.add.at(grad_left, li, coef[:, None] * right[ri] * s[None, :])
    np.add.at(grad_right, ri, coef[:, None] * left[li] * s[None, :])
    grad_s = np.sum(coef[:, None] * left[li] * right[ri], axis=0)
    return grad_left, grad_right, grad_s


def _similarity(left: np.ndarray, right: np.ndarray, s: np.ndarray,
                li: np.ndarray, ri: np.ndarray) -> np.ndarray:
    return np.sum(left[li] * right[ri] * s[None, :], axis=1)


def _spectral_estimate(left: np.ndarray, right: np.ndarray, s: np.ndarray, batch: PairBatch):
    """-2 mean z(x,x⁺) + mean z(x,x⁻)², 返回值与对未缩放特征的梯度"""
    b = batch.size
    pos = _similarity(left, right, s, batch.positive_left, batch.positive_right)
    neg = _similarity(left, right, s, batch.negative_left, batch.negative_right)
    value = -2.0 * float(pos.mean()) + float(np.mean(neg ** 2))

    gl_p, gr_p, gs_p = _bilinear(left, right, s, batch.positive_left, batch.positive_right,
                                 np.full(b, -2.0 / b))
    gl_n, gr_n, gs_n = _bilinear(left, right, s, batch.negative_left, batch.negative_right,
                                 2.0 * neg / b)
    return value, gl_p + gl_n, gr_p + gr_n, gs_p + gs_n


def sampled_scl_loss(degrees: np.ndarray, features: np.ndarray, batch: PairBatch) -> LossValueAndGradient:
    """SCL 无偏估计"""
    big_f = np.asarray(features, dtype=np.float64)
    d = check_degrees(degrees, big_f.shape[0])
    root = np.sqrt(d)[:, None]
    f = big_f / root
    value, gl, gr, _ = _spectral_estimate(f, f, np.ones(f.shape[1]), batch)
    return LossValueAndGradient(value=value, grads={'features': (gl + gr) / root})


def sampled_tricl_loss(degrees: np.ndarray,
                       features: np.ndarray,
                       raw_importance: np.ndarray,
                       batch: PairBatch,
                       penalty_weight: float = Config.PENALTY_WEIGHT) -> LossValueAndGradient:
    """triCL 无偏估计"""
    big_f = np.asarray(features, dtype=np.float64)
    d = check_degrees(degrees, big_f.shape[0])
    raw = check_importance(raw_importance, big_f.shape[1])
    weight = check_penalty(penalty_weight)
    s = softplus(raw)
    root = np.sqrt(d)[:, None]
    f = big_f / root

    value, gl, gr, gs = _spectral_estimate(f, f, s, batch)
    penalty, grad_penalty = decorrelation(big_f, weight)
    return LossValueAndGradient(value=value + penalty,
                                grads={'features': (gl + gr) / root + grad_penalty,
                                       'raw_importance': gs * sigmoid(raw)})


def sampled_triclip_loss(marginal_a: np.ndarray,
                         marginal_b: np.ndarray,
                         features_a: np.ndarray,
                         features_b: np.ndarray,
                         raw_importance: np.ndarray,
                         batch: PairBatch,
                         penalty_weight: float = Config.PENALTY_WEIGHT) -> LossValueAndGradient:
    """triCLIP 无偏估计"""
    fa_big = np.asarray(features_a, dtype=np.float64)
    fb_big = np.asarray(features_b, dtype=np.float64)
    pa = check_degrees(marginal_a, fa_big.shape[0])
    pb = check_degrees(marginal_b, fb_big.shape[0])
    raw = check_importance(raw_importance, fa_big.shape[1])
    weight = check_penalty(penalty_weight)
    s = softplus(raw)
    root_a = np.sqrt(pa)[:, None]
    root_b = np.sqrt(pb)[:, None]

    value, gl, gr, gs = _spectral_estimate(fa_big / root_a, fb_big / root_b, s, batch)
    penalty_a, grad_pa = decorrelation(fa_big, weight)
    penalty_b, grad_pb = decorrelation(fb_big, weight)
    return LossValueAndGradient(value=value + penalty_a + penalty_b,
                                grads={'features': gl / root_a + grad_pa,
                                       'paired_features': gr / root_b + grad_pb,
                                       'raw_importance': gs * sigmoid(raw)})


def sampled_tri_infonce_loss(degrees: np.ndarray,
                             features: np.ndarray,
                             raw_importance: np.ndarray,
                             batch: PairBatch,
                             penalty_weight: float = Config.PENALTY_WEIGHT) -> LossValueAndGradient:
    """批内 log-mean-exp 估计: 每个锚点与全部批内负样本比较"""
    big_f = np.asarray(features, dtype=np.float64)
    d = check_degrees(degrees, big_f.shape[0])
    raw = check_importance(raw_importance, big_f.shape[1])
    weight = check_penalty(penalty_weight)
    s = softplus(raw)
    root = np.sqrt(d)[:, None]
    f = big_f / root
    b = batch.size

    anchors = batch.positive_left
    pos = _similarity(f, f, s, anchors, batch.positive_right)
    neg_logits = (f[anchors] * s[None, :]) @ f[batch.negative_right].T
    value = float(np.mean(-pos + logsumexp(neg_logits, axis=1) - np.log(b)))

    grad = np.zeros_like(f)
    gl, gr, gs = _bilinear(f, f, s, anchors, batch.positive_right, np.full(b, -1.0 / b))
    grad += gl + gr
    weights = softmax(neg_logits, axis=1) / b
    rows = np.repeat(anchors, b)
    cols = np.tile(batch.negative_right, b)
    gl, gr, gs_neg = _bilinear(f, f, s, rows, cols, weights.ravel())
    grad += gl + gr

    penalty, grad_penalty = decorrelation(big_f, weight)
    return LossValueAndGradient(value=value + penalty,
                                grads={'features': grad / root + grad_penalty,
                                       'raw_importance': (gs + gs_neg) * sigmoid(raw)})


def sampled_trimse_loss(features_online: np.ndarray,
                        features_target: np.ndarray,
                        raw_importance: np.ndarray,
                        batch: PairBatch,
                        penalty_weight: float = Config.PENALTY_WEIGHT) -> LossValueAndGradient:
    """仅用正样本对的 tri-MSE 估计"""
    online = np.asarray(features_online, dtype=np.float64)
    target = check_features(features_target, online.shape[0], 'F_target')
    raw = check_importance(raw_importance, online.shape[1])
    weight = check_penalty(penalty_weight)
    s = softplus(raw)

    g_norm = np.linalg.norm(online, axis=1)
    f_norm = np.linalg.norm(target, axis=1)
    li, ri = batch.positive_left, batch.positive_right
    if np.any(g_norm[li] <= 0) or np.any(f_norm[ri] <= 0):
        raise LossInputError("批内存在零范数行")
    g_hat = online / np.where(g_norm > 0, g_norm, 1.0)[:, None]
    f_hat = target / np.where(f_norm > 0, f_norm, 1.0)[:, None]
    b = batch.size

    value = 2.0 - 2.0 * float(np.mean(_similarity(g_hat, f_hat, s, li, ri)))
    h, _, grad_s = _bilinear(g_hat, f_hat, s, li, ri, np.full(b, -2.0 / b))
    radial = np.sum(h * g_hat, axis=1, keepdims=True)
    grad_online = (h - radial * g_hat) / np.where(g_norm > 0, g_norm, 1.0)[:, None]

    penalty, grad_penalty = decorrelation(online, weight)
    return LossValueAndGradient(value=value + penalty,
                                grads={'features': grad_online + grad_penalty,
                                       'raw_importance': grad_s * sigmoid(raw)})
