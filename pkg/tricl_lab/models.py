"""数据模型"""
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import TrainConfig
from .exceptions import ConfigurationError
from .utils.helpers import softplus


@dataclass
class ClassGraphSpec:
    """带类别结构的合成增强图生成参数"""
    num_classes: int
    naturals_per_class: int
    augmentations_per_natural: int
    within_class_mix: float = 0.5
    cross_class_leak: float = 0.1
    seed: int = 0
    # 自然样本概率与自身质量的异质程度, 打破谱的重复
    jitter: float = 0.5

    def __post_init__(self):
        counts = (self.num_classes, self.naturals_per_class, self.augmentations_per_natural)
        if min(counts) < 1:
            raise ConfigurationError(f"类别数/每类自然样本数/每个自然样本增强数必须 >= 1: {counts}")
        if not 0 <= self.cross_class_leak < 1:
            raise ConfigurationError(f"cross_class_leak 必须在 [0,1): {self.cross_class_leak}")
        if self.num_classes == 1 and self.cross_class_leak > 0:
            raise ConfigurationError("只有一个类别时 cross_class_leak 必须为 0")
        if not 0 < self.within_class_mix <= 1:
            raise ConfigurationError(f"within_class_mix 必须在 (0,1]: {self.within_class_mix}")
        if not 0 <= self.jitter < 1:
            raise ConfigurationError(f"jitter 必须在 [0,1): {self.jitter}")

    @property
    def num_naturals(self) -> int:
        return self.num_classes * self.naturals_per_class

    @property
    def n_nodes(self) -> int:
        return self.num_naturals * self.augmentations_per_natural

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class BipartiteGraphSpec:
    """双模态(非对称)联合分布生成参数"""
    n_a: int
    n_b: int
    num_classes: int = 3
    cross_class_leak: float = 0.1
    seed: int = 0
    jitter: float = 0.5

    def __post_init__(self):
        if min(self.n_a, self.n_b, self.num_classes) < 1:
            raise ConfigurationError(f"n_a/n_b/num_classes 必须 >= 1: {(self.n_a, self.n_b, self.num_classes)}")
        if self.num_classes > min(self.n_a, self.n_b):
            raise ConfigurationError("类别数不能超过任一侧样本数")
        if not 0 <= self.cross_class_leak < 1:
            raise ConfigurationError(f"cross_class_leak 必须在 [0,1): {self.cross_class_leak}")
        if not 0 <= self.jitter < 1:
            raise ConfigurationError(f"jitter 必须在 [0,1): {self.jitter}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class AugmentationGraph:
    """有限增强图: A 为正样本对联合概率"""
    n_nodes: int
    adjacency: np.ndarray
    degrees: np.ndarray
    labels: np.ndarray
    natural_index: np.ndarray
    # 生成过程元数据; 由邻接矩阵直接构造时为空
    kernel: Optional[np.ndarray] = None
    natural_weights: Optional[np.ndarray] = None
    natural_labels: Optional[np.ndarray] = None
    spec: Optional[Dict[str, Any]] = None

    @property
    def num_classes(self) -> int:
        return int(np.unique(self.labels).size)


@dataclass
class NormalizedAdjacency:
    """Ā = D^{-1/2} A D^{-1/2}"""
    matrix: np.ndarray
    degrees: np.ndarray


@dataclass
class BipartiteGraph:
    """非对称联合分布 P_O 及其边缘分布"""
    joint: np.ndarray
    marginal_a: np.ndarray
    marginal_b: np.ndarray
    labels_a: np.ndarray
    labels_b: np.ndarray
    spec: Optional[Dict[str, Any]] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.joint.shape


@dataclass
class SpectralReference:
    """截断奇异值分解结果(真值预言机)"""
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    k: int
    symmetric: bool = True
    degenerate: bool = False

    @property
    def sigma_k(self) -> np.ndarray:
        return self.singular_values[:self.k]

    @property
    def u_k(self) -> np.ndarray:
        return self.left_vectors[:, :self.k]

    @property
    def v_k(self) -> np.ndarray:
        return self.right_vectors[:, :self.k]

    def tail_energy(self, k: Optional[int] = None) -> float:
        """Σ_{i>k} σ_i²"""
        k = self.k if k is None else k
        return float(np.sum(self.singular_values[k:] ** 2))


@dataclass
class SpectralGapReport:
    """相邻奇异值间隙, i 从 1 开始"""
    gaps: List[Tuple[int, float]]
    degenerate: bool

    @property
    def min_gap(self) -> float:
        return min((g for _, g in self.gaps), default=float('inf'))


@dataclass
class GroundTruthModel:
    """triCL 全局最优解 f*, S*"""
    features: np.ndarray
    importance: np.ndarray
    degrees: np.ndarray
    convention_note: str = ''
    warnings: List[str] = field(default_factory=list)
    # 非对称情形的 B 侧特征
    paired_features: Optional[np.ndarray] = None
    paired_degrees: Optional[np.ndarray] = None

    @property
    def scaled_features(self) -> np.ndarray:
        """F_x = sqrt(d_x) f(x)"""
        return self.features * np.sqrt(self.degrees)[:, None]

    @property
    def scaled_paired_features(self) -> Optional[np.ndarray]:
        if self.paired_features is None:
            return None
        return self.paired_features * np.sqrt(self.paired_degrees)[:, None]


@dataclass
class EmbeddingModel:
    """表格式编码器: 缩放特征 F 与重要性原始参数"""
    features: np.ndarray
    raw_importance: np.ndarray
    # triCLIP 的 B 侧表 / tri-MSE 的目标表
    paired_features: Optional[np.ndarray] = None

    @property
    def importance(self) -> np.ndarray:
        """s = softplus(raw)"""
        return softplus(self.raw_importance)

    @property
    def k(self) -> int:
        return int(self.features.shape[1])

    def encoder_features(self, degrees: np.ndarray) -> np.ndarray:
        """f(x) = F_x / sqrt(d_x)"""
        return self.features / np.sqrt(degrees)[:, None]

    def copy(self) -> 'EmbeddingModel':
        return EmbeddingModel(
            features=self.features.copy(),
            raw_importance=self.raw_importance.copy(),
            paired_features=None if self.paired_features is None else self.paired_features.copy(),
        )


@dataclass
class LossValueAndGradient:
    """损失值与解析梯度(按参数名索引)"""
    value: float
    grads: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def grad_features(self) -> np.ndarray:
        return self.grads['features']

    @property
    def grad_raw_importance(self) -> Optional[np.ndarray]:
        return self.grads.get('raw_importance')

    @property
    def grad_paired_features(self) -> Optional[np.ndarray]:
        return self.grads.get('paired_features')


@dataclass
class GradientCheckResult:
    """有限差分检查结果"""
    max_relative_error: float
    worst_parameter: Optional[str]
    worst_index: Optional[Tuple[int, ...]]
    checked_coordinates: int

    def passed(self, tolerance: float) -> bool:
        return self.max_relative_error < tolerance


@dataclass
class TrainedModel:
    """训练结果"""
    model: EmbeddingModel
    config: TrainConfig
    history: List[float] = field(default_factory=list)
    final_loss: float = float('nan')
    canonicalized: bool = False
    anchors: List[int] = field(default_factory=list)
    sorted: bool = False
    # 排序置换(0 起始), permutation[i] 为新第 i 维的原维度
    permutation: List[int] = field(default_factory=list)

    @property
    def importance(self) -> np.ndarray:
        return self.model.importance


@dataclass
class IdentifiabilityReport:
    """多次求解之间的成对距离统计"""
    method: str
    num_runs: int
    mean_pairwise_distance: float
    distance_variance: float
    pairs: List[Tuple[int, int, float]] = field(default_factory=list)
    no_pairs: bool = False
    degenerate: bool = False
    reference_norm: float = 0.0


@dataclass
class BoundReport:
    """下游误差上界量"""
    m: int
    k: int
    alpha: float
    head_k: float
    tail_k: float
    tail_m: float
    raw_scl: float
    raw_tricl: float
    u_scl: float
    u_tricl: float
    gap: float
    gap_lower_bound: float
    c1: float
    c2: float


@dataclass
class EvalReport:
    """下游评估汇总, 所有指标位于 [0,1]"""
    probe_errors: Dict[int, float] = field(default_factory=dict)
    scl_probe_errors: Dict[int, float] = field(default_factory=dict)
    oracle_probe_errors: Dict[int, float] = field(default_factory=dict)
    knn_accuracies: List[Tuple[str, float]] = field(default_factory=list)
    retrieval_map: Dict[int, float] = field(default_factory=dict)
    scl_retrieval_map: Dict[int, float] = field(default_factory=dict)
    block_probe: Dict[str, float] = field(default_factory=dict)
    importance_distribution: List[float] = field(default_factory=list)

    def metric_rows(self) -> List[Tuple[str, str, float]]:
        """展开为 (metric, m_or_block, value) 行"""
        rows: List[Tuple[str, str, float]] = []
        for name, table in (('probe_error', self.probe_errors),
                            ('scl_random_probe_error', self.scl_probe_errors),
                            ('oracle_probe_error', self.oracle_probe_errors),
                            ('retrieval_map', self.retrieval_map),
                            ('scl_random_retrieval_map', self.scl_retrieval_map)):
            rows.extend((name, str(m), float(v)) for m, v in sorted(table.items()))
        rows.extend(('knn_accuracy', block, float(v)) for block, v in self.knn_accuracies)
        rows.extend(('block_probe_error', where, float(v)) for where, v in self.block_probe.items())
        rows.extend(('importance_share', str(j + 1), float(v))
                    for j, v in enumerate(self.importance_distribution))
        return rows


@dataclass
class RunManifest:
    """运行清单"""
    command: str
    config: Dict[str, Any]
    tool_version: str
    started_at: str
    duration_seconds: float
    files: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
