"""共享测试夹具"""
import json

import numpy as np
import pytest

from tricl_lab.graph import (build_from_kernel, from_adjacency, generate_bipartite_graph,
                             generate_class_graph)
from tricl_lab.models import BipartiteGraphSpec, ClassGraphSpec

TWO_NODE_ADJACENCY = [[0.3, 0.2], [0.2, 0.3]]


@pytest.fixture
def two_node_graph():
    """Ā = [[0.6, 0.4], [0.4, 0.6]], σ = (1.0, 0.2)"""
    return from_adjacency(TWO_NODE_ADJACENCY, [0, 1])


@pytest.fixture
def class_spec():
    return ClassGraphSpec(num_classes=2, naturals_per_class=3, augmentations_per_natural=2, seed=3)


@pytest.fixture
def class_graph(class_spec):
    return generate_class_graph(class_spec)


@pytest.fixture
def bipartite_graph():
    return generate_bipartite_graph(BipartiteGraphSpec(n_a=6, n_b=5, num_classes=2, seed=1))


def random_kernel_graph(rng: np.random.Generator, n: int):
    """dirichlet 自然样本分布与核构造的随机小图"""
    naturals = rng.dirichlet(np.ones(n))
    kernel = rng.dirichlet(np.ones(n), size=n)
    return build_from_kernel(naturals, kernel)


def write_config(path, data):
    path.write_text(json.dumps(data), encoding='utf-8')
    return path
