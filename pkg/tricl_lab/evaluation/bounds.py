"""下游误差上界量与重要性分布"""
from typing import List, Sequence, Union

import numpy as np

from ..config import Config
from ..exceptions import EvaluationError
from ..models import BoundReport, EmbeddingModel, TrainedModel


def bound_values(spectrum: Sequence[float], m: int, k: int, alpha: float,
                 c1: float = Config.BOUND_C1, c2: float = Config.BOUND_C2) -> BoundReport:
    """
    SCL 随机 m 维与 triCL 前 m 维的误差上界

    u_scl   = c1((1 - m/k) Σ_{i<=k} σ_i² + Σ_{i>k} σ_i²) + c2 α
    u_tricl = c1 Σ_{i>m} σ_i² + c2 α

    Args:
        spectrum: 降序奇异值 σ (非平方)
    """
    sigma = np.asarray(spectrum, dtype=np.float64)
    if not 1 <= m <= k <= sigma.size:
        raise EvaluationError(f"需要 1 <= m <= k <= {sigma.size}: m={m}, k={k}")
    if not 0 <= alpha <= 1:
        raise EvaluationError(f"α 必须在 [0, 1]: {alpha}")
    sq = sigma ** 2
    head_k = float(np.sum(sq[:k]))
    tail_k = float(np.sum(sq[k:]))
    tail_m = float(np.sum(sq[m:]))

    raw_scl = (1.0 - m / k) * head_k + tail_k
    raw_tricl = tail_m
    u_scl = c1 * raw_scl + c2 * alpha
    u_tricl = c1 * raw_tricl + c2 * alpha

    if m < k:
        spread = float(np.mean(sq[:m]) - np.mean(sq[m:k]))
        lower = c1 * (m * (k - m) / k) * spread
    else:
        lower = 0.0
    return BoundReport(m=m, k=k, alpha=float(alpha),
                       head_k=head_k, tail_k=tail_k, tail_m=tail_m,
                       raw_scl=raw_scl, raw_tricl=raw_tricl,
                       u_scl=u_scl, u_tricl=u_tricl, gap=u_scl - u_tricl,
                       gap_lower_bound=lower, c1=c1, c2=c2)


def bounds_sweep(spectrum: Sequence[float], k: int, m_values: Sequence[int], alpha: float) -> List[BoundReport]:
    return [bound_values(spectrum, m, k, alpha) for m in m_values]


def importance_distribution(model: Union[TrainedModel, EmbeddingModel, np.ndarray]) -> np.ndarray:
    """s / Σs"""
    if isinstance(model, TrainedModel):
        s = model.importance
    elif isinstance(model, EmbeddingModel):
        s = model.importance
    else:
        s = np.asarray(model, dtype=np.float64)
    total = float(np.sum(s))
    if total <= 0:
        raise EvaluationError("重要性之和必须为正")
    return s / total
