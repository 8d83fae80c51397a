"""可辨识性实验: 多个最优解之间的成对距离"""
from itertools import combinations
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.stats import ortho_group

from ..config import Config, TrainConfig
from ..exceptions import EvaluationError
from ..models import AugmentationGraph, BipartiteGraph, IdentifiabilityReport
from ..spectra import decompose
from ..trainer import canonicalize_columns, canonicalize_signs, is_canonical, sort_by_importance, train
from ..utils.helpers import derive_rng
from ..utils.logger import get_logger

logger = get_logger()


def identifiability_distance(models: Sequence[np.ndarray],
                             method: str = '',
                             tol: float = Config.ANCHOR_TOLERANCE,
                             degenerate: bool = False) -> IdentifiabilityReport:
    """
    成对 Frobenius 距离的均值与方差(ddof=0)

    输入须为已规范化、已排序的同形状特征矩阵; 只有一个解时均值与方差记为 0 并置 no_pairs.
    """
    if not models:
        raise EvaluationError("至少需要一个解")
    arrays = [np.asarray(m, dtype=np.float64) for m in models]
    shape = arrays[0].shape
    for i, arr in enumerate(arrays):
        if arr.shape != shape:
            raise EvaluationError(f"第 {i} 个解形状 {arr.shape} 与 {shape} 不一致")
        if not is_canonical(arr, tol):
            raise EvaluationError(f"第 {i} 个解未做符号规范化")

    pairs: List[Tuple[int, int, float]] = [
        (i, j, float(np.linalg.norm(arrays[i] - arrays[j])))
        for i, j in combinations(range(len(arrays)), 2)
    ]
    distances = np.array([d for _, _, d in pairs])
    no_pairs = distances.size == 0
    return IdentifiabilityReport(method=method,
                                 num_runs=len(arrays),
                                 mean_pairwise_distance=0.0 if no_pairs else float(distances.mean()),
                                 distance_variance=0.0 if no_pairs else float(distances.var()),
                                 pairs=pairs,
                                 no_pairs=no_pairs,
                                 degenerate=degenerate,
                                 reference_norm=float(np.linalg.norm(arrays[0])))


def _random_rotation(k: int, rng: np.random.Generator) -> np.ndarray:
    if k == 1:
        return np.array([[rng.choice([-1.0, 1.0])]])
    return ortho_group.rvs(k, random_state=rng)


def bifactor_vs_trifactor_experiment(rows: int, cols: int, k: int,
                                     num_solutions: int, seed: int
                                     ) -> Tuple[IdentifiabilityReport, IdentifiabilityReport]:
    """
    随机矩阵上两因子与三因子分解最优解的可辨识性对比

    两因子: U_k Σ^{1/2} R_i (R_i 为独立随机正交矩阵);
    三因子: U_k 配随机符号后按锚点规范化. 距离在左因子上计算.

    Returns:
        (bifactor_report, trifactor_report)
    """
    if num_solutions < 1:
        raise EvaluationError("num_solutions 必须 >= 1")
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((rows, cols))
    ref = decompose(matrix, k)
    base_bi = ref.u_k * np.sqrt(ref.sigma_k)[None, :]

    bifactor, trifactor = [], []
    for i in range(num_solutions):
        solution_rng = derive_rng(seed, 1, i)
        rotated = base_bi @ _random_rotation(k, solution_rng)
        bifactor.append(canonicalize_columns(rotated)[0])
        signs = solution_rng.choice([-1.0, 1.0], size=k)
        trifactor.append(canonicalize_columns(ref.u_k * signs[None, :])[0])

    bi_report = identifiability_distance(bifactor, 'bifactor', degenerate=ref.degenerate)
    tri_report = identifiability_distance(trifactor, 'trifactor', degenerate=ref.degenerate)
    logger.info(f"可辨识性: bifactor 均值 {bi_report.mean_pairwise_distance:.6g}, "
                f"trifactor 均值 {tri_report.mean_pairwise_distance:.6g}")
    return bi_report, tri_report


def trained_identifiability(graph: Union[AugmentationGraph, BipartiteGraph],
                            config: TrainConfig,
                            seeds: Iterable[int]) -> IdentifiabilityReport:
    """多种子训练后(规范化 + 排序)的特征距离, 按种子升序汇总"""
    features = []
    for seed in sorted(seeds):
        run_config = TrainConfig.from_dict({**config.to_dict(), 'seed': seed})
        trained = sort_by_importance(canonicalize_signs(train(graph, run_config), graph))
        features.append(trained.model.features)
    return identifiability_distance(features, f"trained-{config.loss_kind}",
                                    tol=config.anchor_tolerance)
