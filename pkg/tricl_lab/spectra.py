"""谱分解预言机与闭式最优解"""
import dataclasses
import warnings
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from .config import Config
from .exceptions import (SpectralDecompositionError, SpectralDegeneracyWarning,
                         SpectralInputError)
from .graph import normalize, normalize_bipartite
from .models import (AugmentationGraph, BipartiteGraph, GroundTruthModel,
                     SpectralGapReport, SpectralReference)
from .utils.helpers import as_matrix
from .utils.logger import get_logger

logger = get_logger()

SIGN_CONVENTION = '每个奇异向量的最大幅值分量为正(并列取最小下标), U 与 V 同步翻转'


def _fix_signs(left: np.ndarray, right: np.ndarray) -> None:
    """原地翻转列符号: 最大幅值分量为正"""
    for i in range(left.shape[1]):
        column = np.abs(left[:, i])
        peak = column.max()
        if peak == 0:
            continue
        anchor = int(np.flatnonzero(column >= peak * (1.0 - Config.TIE_TOLERANCE))[0])
        if left[anchor, i] < 0:
            left[:, i] *= -1.0
            right[:, i] *= -1.0


def _factorize(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, bool, np.ndarray]:
    """完整分解, 奇异值降序; 返回 (σ, U, V, symmetric, signed_values)"""
    rows, cols = matrix.shape
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    symmetric = rows == cols and float(np.max(np.abs(matrix - matrix.T), initial=0.0)) <= Config.SYMMETRY_TOLERANCE * scale
    try:
        if symmetric:
            # 隐式 QR 三对角化求解全部特征对
            values, vectors = linalg.eigh(matrix, driver='ev')
            order = np.argsort(-np.abs(values), kind='stable')
            values = values[order]
            left = vectors[:, order]
            right = left * np.where(values < 0, -1.0, 1.0)[None, :]
            sigma = np.abs(values)
        else:
            left, sigma, vt = linalg.svd(matrix, full_matrices=False)
            right = vt.T.copy()
            values = sigma.copy()
    except (linalg.LinAlgError, ValueError) as e:
        raise SpectralDecompositionError(f"谱分解未收敛: {e}") from e
    _fix_signs(left, right)
    return sigma, left, right, symmetric, values


def _gaps(sigma: np.ndarray, k: int) -> SpectralGapReport:
    count = min(k, sigma.size - 1)
    gaps = [(i + 1, float(sigma[i] - sigma[i + 1])) for i in range(max(count, 0))]
    degenerate = any(g < Config.DEGENERACY_GAP for _, g in gaps)
    return SpectralGapReport(gaps=gaps, degenerate=degenerate)


def spectral_gap_report(ref: SpectralReference, k: Optional[int] = None) -> SpectralGapReport:
    """相邻奇异值间隙 (i, σ_i - σ_{i+1}), i = 1..min(k, r-1)"""
    return _gaps(ref.singular_values, ref.k if k is None else k)


def decompose(matrix: Union[np.ndarray, list], k: int) -> SpectralReference:
    """
    对称或矩形矩阵的完整谱分解, 保留秩 k

    对称输入用特征分解(σ_i = |λ_i|, V = U·sign(λ)), 其余用 SVD.
    分解后校验重构残差与正交性, 失败抛出 SpectralDecompositionError.
    """
    m = as_matrix(matrix, 'matrix')
    if not 0 <= k <= min(m.shape):
        raise SpectralInputError(f"k={k} 超出矩阵维度 {m.shape}")

    sigma, left, right, symmetric, values = _factorize(m)

    reconstruction = (left[:, :k] * sigma[:k]) @ right[:, :k].T
    residual = float(np.sum((m - reconstruction) ** 2))
    tail = float(np.sum(sigma[k:] ** 2))
    norm_sq = float(np.sum(m ** 2))
    orthogonality = float(np.max(np.abs(left.T @ left - np.eye(left.shape[1])), initial=0.0))
    eigen_residual = 0.0
    if symmetric:
        eigen_residual = float(np.max(np.abs(m @ left - left * values[None, :]), initial=0.0))

    if (abs(residual - tail) > Config.RESIDUAL_TOLERANCE * max(1.0, norm_sq)
            or orthogonality > Config.UNITARY_TOLERANCE
            or eigen_residual > Config.RESIDUAL_TOLERANCE * max(1.0, float(sigma[0]) if sigma.size else 1.0)):
        raise SpectralDecompositionError(
            f"谱分解校验失败: 重构残差 {residual:.6e} vs 尾部能量 {tail:.6e}, "
            f"正交误差 {orthogonality:.3e}, 特征残差 {eigen_residual:.3e}")

    report = _gaps(sigma, k)
    if report.degenerate:
        message = f"前 {k} 个奇异值存在重复(最小间隙 {report.min_gap:.3e})"
        logger.warning(message)
        warnings.warn(message, SpectralDegeneracyWarning, stacklevel=2)

    return SpectralReference(singular_values=sigma, left_vectors=left, right_vectors=right,
                             k=k, symmetric=symmetric, degenerate=report.degenerate)


def _check_unitary(rotation: np.ndarray, k: int) -> np.ndarray:
    r = np.asarray(rotation, dtype=np.float64)
    if r.shape != (k, k):
        raise SpectralInputError(f"旋转矩阵形状必须为 ({k}, {k}), 实际 {r.shape}")
    error = float(np.max(np.abs(r.T @ r - np.eye(k)), initial=0.0))
    if error > Config.UNITARY_TOLERANCE:
        raise SpectralInputError(f"旋转矩阵不是正交矩阵(误差 {error:.3e})")
    return r


def scl_closed_form(ref: SpectralReference,
                    degrees: np.ndarray,
                    rotation: Optional[np.ndarray] = None) -> np.ndarray:
    """
    SCL 全局最优解 f*(x) = (1/sqrt(d_x)) (U_k diag(sqrt σ) R)_x

    返回未缩放特征 f (N×k); 任意正交 R 给出相同的损失值.
    """
    k = ref.k
    d = np.asarray(degrees, dtype=np.float64)
    if d.shape != (ref.left_vectors.shape[0],):
        raise SpectralInputError(f"度向量长度 {d.shape} 与谱分解维度不匹配")
    scaled = ref.u_k * np.sqrt(ref.sigma_k)[None, :]
    if rotation is not None:
        scaled = scaled @ _check_unitary(rotation, k)
    return scaled / np.sqrt(d)[:, None]


def tricl_closed_form(ref: SpectralReference, degrees: np.ndarray) -> GroundTruthModel:
    """triCL 全局最优解: f*_j = U_j / sqrt(d), S* = diag(σ_1..σ_k)"""
    d = np.asarray(degrees, dtype=np.float64)
    if d.shape != (ref.left_vectors.shape[0],):
        raise SpectralInputError(f"度向量长度 {d.shape} 与谱分解维度不匹配")
    notes = []
    if ref.degenerate:
        notes.append('前 k 个奇异值存在重复, 特征仅在重复子空间内可辨识')
    return GroundTruthModel(features=ref.u_k / np.sqrt(d)[:, None],
                            importance=ref.sigma_k.copy(),
                            degrees=d,
                            convention_note=SIGN_CONVENTION,
                            warnings=notes)


def triclip_closed_form(ref: SpectralReference,
                        marginal_a: np.ndarray,
                        marginal_b: np.ndarray) -> GroundTruthModel:
    """非对称最优解: f_A = U_k/sqrt(P_A), f_B = V_k/sqrt(P_B), S* = diag(σ)"""
    pa = np.asarray(marginal_a, dtype=np.float64)
    pb = np.asarray(marginal_b, dtype=np.float64)
    if pa.shape != (ref.left_vectors.shape[0],) or pb.shape != (ref.right_vectors.shape[0],):
        raise SpectralInputError("边缘分布长度与谱分解维度不匹配")
    notes = ['前 k 个奇异值存在重复'] if ref.degenerate else []
    return GroundTruthModel(features=ref.u_k / np.sqrt(pa)[:, None],
                            importance=ref.sigma_k.copy(),
                            degrees=pa,
                            convention_note=SIGN_CONVENTION,
                            warnings=notes,
                            paired_features=ref.v_k / np.sqrt(pb)[:, None],
                            paired_degrees=pb)


def oracle_matrix(g: Union[AugmentationGraph, BipartiteGraph]) -> np.ndarray:
    """图的归一化矩阵(Ā 或 P̄_O)"""
    if isinstance(g, BipartiteGraph):
        return normalize_bipartite(g)
    return normalize(g).matrix


def find_gapped_seed(generator: Callable[[Any], Union[AugmentationGraph, BipartiteGraph]],
                     spec: Any,
                     k: int,
                     min_gap: float,
                     max_tries: int = 200) -> Tuple[Any, SpectralReference]:
    """
    从 spec.seed 开始递增种子, 返回前 k+1 个奇异值间隙均 >= min_gap 的首个图

    Returns:
        (graph, reference)
    """
    for offset in range(max_tries):
        candidate = dataclasses.replace(spec, seed=spec.seed + offset)
        graph = generator(candidate)
        matrix = oracle_matrix(graph)
        if k >= min(matrix.shape):
            raise SpectralInputError(f"k={k} 必须小于矩阵维度 {matrix.shape}")
        sigma = _factorize(matrix)[0]
        gaps = _gaps(sigma, k)
        if gaps.min_gap >= min_gap:
            logger.info(f"种子 {candidate.seed} 满足谱间隙 >= {min_gap} (最小 {gaps.min_gap:.4f})")
            return graph, decompose(matrix, k)
    raise SpectralDecompositionError(f"{max_tries} 个种子内未找到谱间隙 >= {min_gap} 的图")


def reference_to_dict(ref: SpectralReference) -> Dict[str, Any]:
    return {
        'sigma': ref.singular_values.tolist(),
        'U': ref.left_vectors.tolist(),
        'V': ref.right_vectors.tolist(),
        'k': ref.k,
        'symmetric': ref.symmetric,
        'degenerate': ref.degenerate,
    }


def reference_from_dict(data: Dict[str, Any]) -> SpectralReference:
    try:
        return SpectralReference(singular_values=np.asarray(data['sigma'], dtype=np.float64),
                                 left_vectors=np.asarray(data['U'], dtype=np.float64),
                                 right_vectors=np.asarray(data['V'], dtype=np.float64),
                                 k=int(data['k']),
                                 symmetric=bool(data.get('symmetric', True)),
                                 degenerate=bool(data.get('degenerate', False)))
    except KeyError as e:
        raise SpectralInputError(f"谱参考对象缺少字段: {e}") from e
