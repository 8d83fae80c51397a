"""评估"""
from .identifiability import (identifiability_distance, bifactor_vs_trifactor_experiment,
                              trained_identifiability)
from .probes import (linear_probe, knn_eval, consecutive_blocks, retrieval_map,
                     scl_random_subset_eval, random_subset_retrieval, dimension_block_probe)
from .bounds import bound_values, bounds_sweep, importance_distribution

__all__ = [
    'identifiability_distance', 'bifactor_vs_trifactor_experiment', 'trained_identifiability',
    'linear_probe', 'knn_eval', 'consecutive_blocks', 'retrieval_map',
    'scl_random_subset_eval', 'random_subset_retrieval', 'dimension_block_probe',
    'bound_values', 'bounds_sweep', 'importance_distribution',
]
