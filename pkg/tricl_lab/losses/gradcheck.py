"""中心差分梯度检查"""
from typing import Callable, Dict, Optional

import numpy as np

from ..config import Config
from ..exceptions import LossInputError
from ..models import GradientCheckResult, LossValueAndGradient
from ..utils.logger import get_logger

logger = get_logger()


def relative_error(analytic: float, numeric: float, floor: float = Config.GRADCHECK_FLOOR) -> float:
    """|a - n| / max(|a|, |n|, floor)"""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def finite_difference_check(loss_fn: Callable[[Dict[str, np.ndarray]], LossValueAndGradient],
                            params: Dict[str, np.ndarray],
                            eps: float = Config.GRADCHECK_EPS,
                            seed: int = 0,
                            max_coords: int = Config.GRADCHECK_MAX_COORDS,
                            subset_size: int = Config.GRADCHECK_MIN_SUBSET,
                            floor: float = Config.GRADCHECK_FLOOR) -> GradientCheckResult:
    """
    比较解析梯度与中心差分 (L(p+ε) - L(p-ε)) / 2ε

    坐标总数超过 max_coords 时按种子抽取 subset_size 个坐标.

    Args:
        loss_fn: 参数字典 → LossValueAndGradient, 梯度键与参数键一致
        params: 待检查参数; 不会被修改
    """
    if not 1e-7 <= eps <= 1e-3:
        raise LossInputError(f"eps 必须在 [1e-7, 1e-3]: {eps}")

    base = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
    analytic = loss_fn(base).grads
    names = list(base)
    sizes = [base[name].size for name in names]
    offsets = np.cumsum([0] + sizes)
    total = int(offsets[-1])

    if total > max_coords:
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(total, size=min(max(subset_size, 1), total), replace=False))
    else:
        chosen = np.arange(total)

    worst = 0.0
    worst_name: Optional[str] = None
    worst_index = None
    for flat in chosen:
        block = int(np.searchsorted(offsets, flat, side='right') - 1)
        name = names[block]
        index = np.unravel_index(int(flat - offsets[block]), base[name].shape)
        original = base[name][index]

        base[name][index] = original + eps
        plus = loss_fn(base).value
        base[name][index] = original - eps
        minus = loss_fn(base).value
        base[name][index] = original

        numeric = (plus - minus) / (2.0 * eps)
        grad = analytic.get(name)
        exact = 0.0 if grad is None else float(grad[index])
        error = relative_error(exact, numeric, floor)
        if error > worst or worst_name is None:
            worst, worst_name, worst_index = error, name, tuple(int(i) for i in index)

    logger.debug(f"梯度检查: {len(chosen)} 个坐标, 最大相对误差 {worst:.3e} ({worst_name}{worst_index})")
    return GradientCheckResult(max_relative_error=worst,
                               worst_parameter=worst_name,
                               worst_index=worst_index,
                               checked_coordinates=int(len(chosen)))
