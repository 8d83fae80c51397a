"""三因子对比学习实验室"""
from .config import Config, TrainConfig, ExperimentConfig
from .exceptions import (LabError, ConfigurationError, GraphConstructionError,
                         SpectralDecompositionError, SpectralDegeneracyWarning, SpectralInputError,
                         LossInputError, TrainingDivergenceError, CanonicalizationError,
                         EvaluationError, ArtifactError)
from .graph import (build_from_kernel, from_adjacency, generate_class_graph, generate_bipartite_graph,
                    normalize, denormalize, compute_alpha, normalize_bipartite)
from .spectra import (decompose, scl_closed_form, tricl_closed_form, triclip_closed_form,
                      spectral_gap_report, find_gapped_seed)
from .trainer import train, canonicalize_signs, sort_by_importance, select_top_features
from .experiments import Laboratory
from .utils.logger import setup_logger, get_logger

# 初始化日志
setup_logger()
logger = get_logger()

__version__ = Config.VERSION

__all__ = [
    'Config', 'TrainConfig', 'ExperimentConfig', 'Laboratory',
    'LabError', 'ConfigurationError', 'GraphConstructionError', 'SpectralDecompositionError',
    'SpectralDegeneracyWarning', 'SpectralInputError', 'LossInputError',
    'TrainingDivergenceError', 'CanonicalizationError', 'EvaluationError', 'ArtifactError',
    'build_from_kernel', 'from_adjacency', 'generate_class_graph', 'generate_bipartite_graph',
    'normalize', 'denormalize', 'compute_alpha', 'normalize_bipartite',
    'decompose', 'scl_closed_form', 'tricl_closed_form', 'triclip_closed_form',
    'spectral_gap_report', 'find_gapped_seed',
    'train', 'canonicalize_signs', 'sort_by_importance', 'select_top_features',
    '__version__',
]
