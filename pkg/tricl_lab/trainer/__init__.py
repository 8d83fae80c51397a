"""训练器"""
from .trainer import (init_model, train, divergence_threshold, canonicalize_signs,
                      canonicalize_columns, is_canonical, sort_by_importance, select_top_features,
                      model_to_dict, model_from_dict, UNIT_RAW_IMPORTANCE)
from .objectives import BaseObjective, build_objective, OBJECTIVES
from .optimizers import BaseOptimizer, MomentumOptimizer, AdamOptimizer, build_optimizer

__all__ = [
    'init_model', 'train', 'divergence_threshold', 'canonicalize_signs', 'canonicalize_columns',
    'is_canonical', 'sort_by_importance', 'select_top_features', 'model_to_dict', 'model_from_dict',
    'UNIT_RAW_IMPORTANCE', 'BaseObjective', 'build_objective', 'OBJECTIVES',
    'BaseOptimizer', 'MomentumOptimizer', 'AdamOptimizer', 'build_optimizer',
]
