"""配置文件"""
from dataclasses import dataclass, field, fields, asdict
from typing import Any, Dict, List, Optional

from .exceptions import ConfigurationError


class Config:
    """全局配置"""
    VERSION = '0.3.0'

    # 日志配置
    LOG_LEVEL = 'INFO'
    LOG_FILE = None
    LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
    LOG_EVERY = 1000

    # 数值容差
    MASS_TOLERANCE = 1e-12
    KERNEL_TOLERANCE = 1e-10
    SYMMETRY_TOLERANCE = 1e-12
    UNITARY_TOLERANCE = 1e-10
    DEGENERACY_GAP = 1e-6
    TIE_TOLERANCE = 1e-12
    RESIDUAL_TOLERANCE = 1e-8

    # 训练默认值
    PENALTY_WEIGHT = 1.0
    MOMENTUM = 0.9
    ADAM_BETAS = (0.9, 0.999)
    ADAM_EPS = 1e-8
    ANCHOR_TOLERANCE = 1e-8
    EMA_COEFFICIENT = 0.99
    DIVERGENCE_FACTOR = 1e6

    # 评估默认值(上界常数 c1, c2)
    BOUND_C1 = 32.0
    BOUND_C2 = 80.0
    RIDGE = 1e-6
    RETRIEVAL_TOP_R = 10
    KNN_NEIGHBORS = 10

    # 梯度检查
    GRADCHECK_EPS = 1e-5
    GRADCHECK_FLOOR = 1e-3
    GRADCHECK_MAX_COORDS = 400
    GRADCHECK_MIN_SUBSET = 200

    # 输出文件
    MANIFEST_NAME = 'manifest.json'
    REPORT_NAME = 'report.md'
    CSV_FLOAT_FORMAT = '.17g'

    # 时间格式
    TIMESTAMP_FORMAT = '%Y%m%dT%H%M%SZ'


LOSS_KINDS = ('scl', 'tricl', 'tri_infonce', 'triclip', 'trimse')
OPTIMIZERS = ('momentum', 'adaptive')
MODES = ('exact', 'sampled')
EXPERIMENT_KINDS = ('identifiability', 'train-eval', 'bounds-sweep', 'gradient-audit')
GRAPH_TYPES = ('class', 'bipartite', 'adjacency', 'kernel')


def build_section(cls, data: Optional[Dict[str, Any]], section: str):
    """从字典构造配置段, 拒绝未知字段"""
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigurationError(f"配置段 {section} 必须是对象")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"配置段 {section} 含未知字段: {', '.join(unknown)}")
    return cls(**data)


@dataclass
class TrainConfig:
    """训练配置"""
    loss_kind: str = 'tricl'
    k: int = 8
    penalty_weight: float = Config.PENALTY_WEIGHT
    optimizer: str = 'momentum'
    learning_rate: float = 0.05
    momentum: float = Config.MOMENTUM
    steps: int = 5000
    mode: str = 'exact'
    batch_pairs: int = 256
    seed: int = 0
    # None 表示按 sqrt(k/N) 取值, 使初始列范数约为 1
    init_scale: Optional[float] = None
    anchor_tolerance: float = Config.ANCHOR_TOLERANCE
    ema_coefficient: float = Config.EMA_COEFFICIENT

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise ConfigurationError(f"未知损失类型: {self.loss_kind} (可选 {', '.join(LOSS_KINDS)})")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigurationError(f"未知优化器: {self.optimizer}")
        if self.mode not in MODES:
            raise ConfigurationError(f"未知训练模式: {self.mode}")
        if int(self.k) < 1:
            raise ConfigurationError(f"k 必须 >= 1, 实际 {self.k}")
        if int(self.steps) < 1:
            raise ConfigurationError(f"steps 必须 >= 1, 实际 {self.steps}")
        if not self.learning_rate > 0:
            raise ConfigurationError(f"learning_rate 必须 > 0, 实际 {self.learning_rate}")
        if self.penalty_weight < 0:
            raise ConfigurationError(f"penalty_weight 不能为负: {self.penalty_weight}")
        if not 0 <= self.momentum < 1:
            raise ConfigurationError(f"momentum 必须在 [0,1): {self.momentum}")
        if self.mode == 'sampled' and int(self.batch_pairs) < 1:
            raise ConfigurationError(f"采样模式下 batch_pairs 必须 >= 1, 实际 {self.batch_pairs}")
        if self.init_scale is not None and self.init_scale < 0:
            raise ConfigurationError(f"init_scale 不能为负: {self.init_scale}")
        if not 0 <= self.ema_coefficient < 1:
            raise ConfigurationError(f"ema_coefficient 必须在 [0,1): {self.ema_coefficient}")
        if not self.anchor_tolerance > 0:
            raise ConfigurationError(f"anchor_tolerance 必须 > 0: {self.anchor_tolerance}")
        self.k = int(self.k)
        self.steps = int(self.steps)
        self.batch_pairs = int(self.batch_pairs)
        self.seed = int(self.seed)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> 'TrainConfig':
        return build_section(cls, data, 'train')


@dataclass
class GraphSection:
    """图来源配置"""
    type: str = 'class'
    spec: Optional[Dict[str, Any]] = None
    adjacency: Optional[List[List[float]]] = None
    labels: Optional[List[int]] = None
    naturals: Optional[List[float]] = None
    kernel: Optional[List[List[float]]] = None
    natural_labels: Optional[List[int]] = None

    def __post_init__(self):
        if self.type not in GRAPH_TYPES:
            raise ConfigurationError(f"未知图类型: {self.type}")
        if self.type == 'adjacency' and (self.adjacency is None or self.labels is None):
            raise ConfigurationError("adjacency 图需要 adjacency 与 labels")
        if self.type == 'kernel' and (self.naturals is None or self.kernel is None):
            raise ConfigurationError("kernel 图需要 naturals 与 kernel")


@dataclass
class EvalSection:
    """评估参数"""
    m_grid: List[int] = field(default_factory=lambda: [1, 2, 4, 8])
    block_width: int = 2
    neighbors: int = Config.KNN_NEIGHBORS
    top_r: int = Config.RETRIEVAL_TOP_R
    trials: int = 20
    ridge: float = Config.RIDGE

    def __post_init__(self):
        if not self.m_grid or min(self.m_grid) < 1:
            raise ConfigurationError("m_grid 必须非空且元素 >= 1")
        if self.block_width < 1 or self.neighbors < 1 or self.top_r < 1 or self.trials < 1:
            raise ConfigurationError("block_width/neighbors/top_r/trials 必须 >= 1")
        if self.ridge < 0:
            raise ConfigurationError(f"ridge 不能为负: {self.ridge}")


@dataclass
class IdentifiabilitySection:
    """可辨识性实验参数"""
    rows: int = 200
    cols: int = 150
    k: int = 16
    num_solutions: int = 10
    trained_runs: int = 0

    def __post_init__(self):
        if min(self.rows, self.cols) < 1 or self.k < 1 or self.num_solutions < 1:
            raise ConfigurationError("rows/cols/k/num_solutions 必须 >= 1")
        if self.k > min(self.rows, self.cols):
            raise ConfigurationError(f"k={self.k} 超过矩阵最小维度 {min(self.rows, self.cols)}")
        if self.trained_runs < 0:
            raise ConfigurationError("trained_runs 不能为负")


@dataclass
class AuditSection:
    """梯度审计参数"""
    losses: List[str] = field(default_factory=lambda: list(LOSS_KINDS))
    instances: int = 20
    eps: float = Config.GRADCHECK_EPS
    n_nodes: int = 8
    k: int = 3

    def __post_init__(self):
        unknown = [name for name in self.losses if name not in LOSS_KINDS]
        if unknown:
            raise ConfigurationError(f"未知损失名: {', '.join(unknown)}")
        if not 1e-7 <= self.eps <= 1e-3:
            raise ConfigurationError(f"eps 必须在 [1e-7, 1e-3]: {self.eps}")
        if self.instances < 1 or self.n_nodes < 2 or self.k < 1:
            raise ConfigurationError("instances >= 1, n_nodes >= 2, k >= 1")


@dataclass
class ExperimentConfig:
    """实验配置(单个 JSON 文档)"""
    kind: str
    seed: int = 0
    output_dir: str = 'runs/latest'
    graph: GraphSection = field(default_factory=GraphSection)
    train: TrainConfig = field(default_factory=TrainConfig)
    evaluation: EvalSection = field(default_factory=EvalSection)
    identifiability: IdentifiabilitySection = field(default_factory=IdentifiabilitySection)
    audit: AuditSection = field(default_factory=AuditSection)

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigurationError(f"未知实验类型: {self.kind} (可选 {', '.join(EXPERIMENT_KINDS)})")
        if int(self.seed) < 0:
            raise ConfigurationError(f"seed 必须为非负整数: {self.seed}")
        self.seed = int(self.seed)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """从字典构造, 拒绝任何层级的未知字段"""
        if not isinstance(data, dict):
            raise ConfigurationError("实验配置必须是 JSON 对象")
        sections = {
            'graph': GraphSection,
            'train': TrainConfig,
            'evaluation': EvalSection,
            'identifiability': IdentifiabilitySection,
            'audit': AuditSection,
        }
        scalars = {'kind', 'seed', 'output_dir'}
        unknown = sorted(set(data) - scalars - set(sections))
        if unknown:
            raise ConfigurationError(f"实验配置含未知字段: {', '.join(unknown)}")
        if 'kind' not in data:
            raise ConfigurationError("实验配置缺少 kind")
        try:
            built = {name: build_section(section_cls, data.get(name), name)
                     for name, section_cls in sections.items()}
            return cls(kind=data['kind'],
                       seed=data.get('seed', 0),
                       output_dir=data.get('output_dir', 'runs/latest'),
                       **built)
        except ConfigurationError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"实验配置字段类型错误: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
