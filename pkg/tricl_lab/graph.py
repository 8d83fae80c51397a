"""增强图构造与归一化"""
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from .config import Config
from .exceptions import GraphConstructionError
from .models import (AugmentationGraph, BipartiteGraph, BipartiteGraphSpec,
                     ClassGraphSpec, NormalizedAdjacency)
from .utils.logger import get_logger

logger = get_logger()


def _check_distribution(values: np.ndarray, name: str) -> None:
    if np.any(values < 0):
        raise GraphConstructionError(f"{name} 含负值")
    total = float(values.sum())
    if abs(total - 1.0) > Config.KERNEL_TOLERANCE:
        raise GraphConstructionError(f"{name} 之和必须为 1, 实际 {total!r}")


def _assemble(adjacency: np.ndarray,
              labels: Optional[Sequence[int]],
              natural_index: Optional[Sequence[int]],
              **metadata) -> AugmentationGraph:
    """校验邻接矩阵并计算度"""
    a = np.asarray(adjacency, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphConstructionError(f"邻接矩阵必须为方阵, 实际形状 {a.shape}")
    n = a.shape[0]
    if n == 0:
        raise GraphConstructionError("邻接矩阵为空")
    if np.any(a < 0):
        raise GraphConstructionError("邻接矩阵含负值")
    asym = float(np.max(np.abs(a - a.T)))
    if asym > Config.SYMMETRY_TOLERANCE:
        raise GraphConstructionError(f"邻接矩阵不对称, 最大偏差 {asym:.3e}")
    a = 0.5 * (a + a.T)

    total = float(a.sum())
    if abs(total - 1.0) > Config.MASS_TOLERANCE:
        raise GraphConstructionError(f"邻接矩阵总质量必须为 1, 实际 {total!r}")

    degrees = a.sum(axis=1)
    isolated = np.flatnonzero(degrees <= 0)
    if isolated.size:
        raise GraphConstructionError(f"存在孤立增强样本(度为 0): {isolated.tolist()}")

    labels_arr = np.zeros(n, dtype=np.int64) if labels is None else np.asarray(labels, dtype=np.int64)
    index_arr = np.arange(n, dtype=np.int64) if natural_index is None else np.asarray(natural_index, dtype=np.int64)
    if labels_arr.shape != (n,) or index_arr.shape != (n,):
        raise GraphConstructionError(f"labels/natural_index 长度必须为 {n}")

    return AugmentationGraph(n_nodes=n, adjacency=a, degrees=degrees,
                             labels=labels_arr, natural_index=index_arr, **metadata)


def build_from_kernel(naturals: Sequence[float],
                      kernel: Sequence[Sequence[float]],
                      natural_labels: Optional[Sequence[int]] = None,
                      natural_index: Optional[Sequence[int]] = None,
                      labels: Optional[Sequence[int]] = None,
                      spec: Optional[Dict[str, Any]] = None) -> AugmentationGraph:
    """
    由自然样本分布与增强核构造增强图

    A_{x,x'} = Σ_x̄ p(x̄) A(x|x̄) A(x'|x̄)

    Args:
        naturals: 自然样本概率 p (长度 n_naturals)
        kernel: 增强核, 第 i 行为自然样本 i 的增强分布
        natural_labels: 自然样本标签
        natural_index: 增强样本所属自然样本, 缺省取贡献最大的自然样本
        labels: 增强样本标签, 缺省继承 natural_index 对应的自然样本标签
    """
    p = np.asarray(naturals, dtype=np.float64)
    k = np.asarray(kernel, dtype=np.float64)
    if p.ndim != 1 or k.ndim != 2 or k.shape[0] != p.size:
        raise GraphConstructionError(f"核形状 {k.shape} 与自然样本数 {p.size} 不匹配")
    _check_distribution(p, "自然样本分布")
    for i, row in enumerate(k):
        _check_distribution(row, f"增强核第 {i} 行")

    weighted = k * np.sqrt(p)[:, None]
    adjacency = weighted.T @ weighted
    degrees = adjacency.sum(axis=1)
    isolated = np.flatnonzero(degrees <= 0)
    if isolated.size:
        raise GraphConstructionError(f"增强样本不可达(度为 0): {isolated.tolist()}")

    if natural_index is None:
        natural_index = np.argmax(k * p[:, None], axis=0)
    nat_labels = None if natural_labels is None else np.asarray(natural_labels, dtype=np.int64)
    if labels is None and nat_labels is not None:
        labels = nat_labels[np.asarray(natural_index)]

    return _assemble(adjacency, labels, natural_index,
                     kernel=k, natural_weights=p, natural_labels=nat_labels, spec=spec)


def from_adjacency(adjacency: Sequence[Sequence[float]],
                   labels: Sequence[int],
                   natural_index: Optional[Sequence[int]] = None,
                   spec: Optional[Dict[str, Any]] = None) -> AugmentationGraph:
    """由显式联合概率矩阵构造增强图(无生成元数据)"""
    return _assemble(np.asarray(adjacency, dtype=np.float64), labels, natural_index, spec=spec)


def generate_class_graph(spec: ClassGraphSpec) -> AugmentationGraph:
    """
    生成带类别结构的合成增强图

    自然样本 i 的核: 自身增强占 (1-β)w_i, 同类其他自然样本占 (1-β)(1-w_i),
    其他类别占 β; 质量在目标自然样本的增强之间按共享权重 ω 分配.
    """
    rng = np.random.default_rng(spec.seed)
    c, m, a = spec.num_classes, spec.naturals_per_class, spec.augmentations_per_natural
    n_nat = c * m
    beta = spec.cross_class_leak

    natural_labels = np.repeat(np.arange(c), m)
    p = 1.0 + spec.jitter * rng.uniform(-1.0, 1.0, n_nat)
    p /= p.sum()
    t = rng.permutation(np.linspace(0.0, 1.0, n_nat))
    own_share = spec.within_class_mix * (1.0 - spec.jitter * t)
    in_class = rng.uniform(0.1, 1.0, (n_nat, n_nat))
    cross = rng.uniform(0.1, 1.0, (n_nat, n_nat))
    omega = rng.uniform(0.5, 1.5, n_nat * a)

    # 自然样本级核
    routed = np.zeros((n_nat, n_nat))
    for i in range(n_nat):
        same = np.flatnonzero((natural_labels == natural_labels[i]) & (np.arange(n_nat) != i))
        other = np.flatnonzero(natural_labels != natural_labels[i])
        if same.size == 0:
            routed[i, i] = 1.0 - beta
        else:
            routed[i, i] = (1.0 - beta) * own_share[i]
            weights = in_class[i, same]
            routed[i, same] = (1.0 - beta) * (1.0 - own_share[i]) * weights / weights.sum()
        if other.size and beta > 0:
            weights = cross[i, other]
            routed[i, other] = beta * weights / weights.sum()

    natural_index = np.repeat(np.arange(n_nat), a)
    omega_share = omega / np.bincount(natural_index, weights=omega)[natural_index]
    kernel = routed[:, natural_index] * omega_share[None, :]
    # 行和精确归一
    kernel /= kernel.sum(axis=1, keepdims=True)

    graph = build_from_kernel(p, kernel,
                              natural_labels=natural_labels,
                              natural_index=natural_index,
                              spec={'type': 'class', **spec.to_dict()})
    logger.debug(f"生成类别图: N={graph.n_nodes}, C={c}, M={m}, a={a}, β={beta}")
    return graph


def normalize(g: AugmentationGraph) -> NormalizedAdjacency:
    """Ā = D^{-1/2} A D^{-1/2}"""
    d = np.asarray(g.degrees, dtype=np.float64)
    if np.any(d <= 0):
        raise GraphConstructionError(f"存在零度节点: {np.flatnonzero(d <= 0).tolist()}")
    matrix = g.adjacency / np.sqrt(np.outer(d, d))
    return NormalizedAdjacency(matrix=matrix, degrees=d.copy())


def denormalize(normalized: Union[NormalizedAdjacency, np.ndarray],
                degrees: Optional[np.ndarray] = None) -> np.ndarray:
    """A = D^{1/2} Ā D^{1/2}"""
    if isinstance(normalized, NormalizedAdjacency):
        matrix, degrees = normalized.matrix, normalized.degrees
    else:
        matrix = np.asarray(normalized, dtype=np.float64)
    if degrees is None:
        raise GraphConstructionError("反归一化需要度向量")
    root = np.sqrt(np.asarray(degrees, dtype=np.float64))
    return matrix * np.outer(root, root)


def compute_alpha(g: AugmentationGraph) -> float:
    """增强改变自然样本标签的概率 α"""
    if g.kernel is None or g.natural_weights is None or g.natural_labels is None:
        raise GraphConstructionError("缺少标签元数据(核/自然样本分布/自然样本标签), 无法计算 α")
    mismatch = g.natural_labels[:, None] != g.labels[None, :]
    alpha = float(np.sum(g.natural_weights[:, None] * g.kernel * mismatch))
    return min(max(alpha, 0.0), 1.0)


def _bipartite_labels(n: int, num_classes: int) -> np.ndarray:
    return (np.arange(n) * num_classes) // n


def bipartite_from_joint(joint: Sequence[Sequence[float]],
                         labels_a: Optional[Sequence[int]] = None,
                         labels_b: Optional[Sequence[int]] = None,
                         spec: Optional[Dict[str, Any]] = None) -> BipartiteGraph:
    """由显式联合分布 P_O 构造双模态图"""
    p = np.asarray(joint, dtype=np.float64)
    if p.ndim != 2 or 0 in p.shape:
        raise GraphConstructionError(f"联合分布必须是非空二维矩阵, 实际形状 {p.shape}")
    if np.any(p < 0):
        raise GraphConstructionError("联合分布含负值")
    total = float(p.sum())
    if abs(total - 1.0) > Config.MASS_TOLERANCE:
        raise GraphConstructionError(f"联合分布总质量必须为 1, 实际 {total!r}")

    marginal_a = p.sum(axis=1)
    marginal_b = p.sum(axis=0)
    for name, marginal in (('P_A', marginal_a), ('P_B', marginal_b)):
        zero = np.flatnonzero(marginal <= 0)
        if zero.size:
            raise GraphConstructionError(f"边缘分布 {name} 存在零值: {zero.tolist()}")

    n_a, n_b = p.shape
    la = np.zeros(n_a, dtype=np.int64) if labels_a is None else np.asarray(labels_a, dtype=np.int64)
    lb = np.zeros(n_b, dtype=np.int64) if labels_b is None else np.asarray(labels_b, dtype=np.int64)
    if la.shape != (n_a,) or lb.shape != (n_b,):
        raise GraphConstructionError("标签长度与联合分布形状不匹配")
    return BipartiteGraph(joint=p, marginal_a=marginal_a, marginal_b=marginal_b,
                          labels_a=la, labels_b=lb, spec=spec)


def generate_bipartite_graph(spec: BipartiteGraphSpec) -> BipartiteGraph:
    """
    生成带类别结构的双模态联合分布

    A 侧样本以 1-β_c 的质量连接同类 B 侧样本, β_c 连接其他类别;
    β_c 按类别做异质化处理.
    """
    rng = np.random.default_rng(spec.seed)
    c = spec.num_classes
    labels_a = _bipartite_labels(spec.n_a, c)
    labels_b = _bipartite_labels(spec.n_b, c)

    p_a = 1.0 + spec.jitter * rng.uniform(-1.0, 1.0, spec.n_a)
    p_a /= p_a.sum()
    t = rng.permutation(np.linspace(0.0, 1.0, c))
    leak = spec.cross_class_leak * (1.0 - spec.jitter * t)
    weights = rng.uniform(0.1, 1.0, (spec.n_a, spec.n_b))

    same = labels_a[:, None] == labels_b[None, :]
    in_class = np.where(same, weights, 0.0)
    in_class /= in_class.sum(axis=1, keepdims=True)
    row_leak = leak[labels_a][:, None]
    if c > 1:
        cross = np.where(same, 0.0, weights)
        cross /= cross.sum(axis=1, keepdims=True)
        kernel = (1.0 - row_leak) * in_class + row_leak * cross
    else:
        kernel = in_class

    joint = p_a[:, None] * kernel
    joint /= joint.sum()
    graph = bipartite_from_joint(joint, labels_a, labels_b,
                                 spec={'type': 'bipartite', **spec.to_dict()})
    logger.debug(f"生成双模态图: {spec.n_a}x{spec.n_b}, C={c}")
    return graph


def normalize_bipartite(bg: BipartiteGraph) -> np.ndarray:
    """P̄_O = P_O / sqrt(P_A P_Bᵀ)"""
    pa = np.asarray(bg.marginal_a, dtype=np.float64)
    pb = np.asarray(bg.marginal_b, dtype=np.float64)
    if np.any(pa <= 0) or np.any(pb <= 0):
        raise GraphConstructionError("边缘分布存在零值, 无法归一化")
    return bg.joint / np.sqrt(np.outer(pa, pb))


def graph_to_dict(g: Union[AugmentationGraph, BipartiteGraph]) -> Dict[str, Any]:
    """图 → JSON 对象"""
    if isinstance(g, BipartiteGraph):
        n_a, n_b = g.shape
        return {
            'n_a': n_a,
            'n_b': n_b,
            'joint': g.joint.tolist(),
            'labels_a': g.labels_a.tolist(),
            'labels_b': g.labels_b.tolist(),
            'spec': g.spec,
        }
    data = {
        'n': g.n_nodes,
        'adjacency': g.adjacency.tolist(),
        'labels': g.labels.tolist(),
        'natural_index': g.natural_index.tolist(),
        'spec': g.spec,
    }
    if g.kernel is not None:
        data['naturals'] = g.natural_weights.tolist()
        data['kernel'] = g.kernel.tolist()
        data['natural_labels'] = g.natural_labels.tolist()
    return data


def graph_from_dict(data: Dict[str, Any]) -> Union[AugmentationGraph, BipartiteGraph]:
    """JSON 对象 → 图"""
    if 'joint' in data:
        graph = bipartite_from_joint(data['joint'], data.get('labels_a'), data.get('labels_b'),
                                     spec=data.get('spec'))
        if graph.shape != (data.get('n_a', graph.shape[0]), data.get('n_b', graph.shape[1])):
            raise GraphConstructionError("n_a/n_b 与联合分布形状不一致")
        return graph

    try:
        adjacency = data['adjacency']
        labels = data['labels']
    except KeyError as e:
        raise GraphConstructionError(f"图对象缺少字段: {e}") from e
    graph = from_adjacency(adjacency, labels, data.get('natural_index'), spec=data.get('spec'))
    if 'n' in data and int(data['n']) != graph.n_nodes:
        raise GraphConstructionError(f"n={data['n']} 与邻接矩阵维度 {graph.n_nodes} 不一致")
    if 'kernel' in data:
        graph.kernel = np.asarray(data['kernel'], dtype=np.float64)
        graph.natural_weights = np.asarray(data['naturals'], dtype=np.float64)
        graph.natural_labels = np.asarray(data['natural_labels'], dtype=np.int64)
    return graph
