import numpy as np
import pytest

from hypermix import _kernels
from hypermix.hypergraph import Hypergraph, build_hypergraph


def random_hypergraph(rng, n=12, sizes=(2, 2, 3, 3, 4, 5), max_weight=3):
    """Small random hypergraph with distinct node sets."""
    edges = {}
    for d in sizes:
        while True:
            key = tuple(sorted(rng.choice(n, size=d, replace=False).tolist()))
            if key not in edges:
                edges[key] = int(rng.integers(1, max_weight + 1))
                break
    raw = [([str(i) for i in key], w) for key, w in edges.items()]
    return build_hypergraph(raw, nodes=[str(i) for i in range(n)])


def random_params(rng, n, k, z=None):
    from hypermix.em import _mirror_upper, _normalize_columns

    u = rng.uniform(0.02, 0.98, size=(n, k))
    w = _mirror_upper(rng.uniform(0.05, 1.0, size=(k, k)))
    beta = _normalize_columns(rng.uniform(0.05, 1.0, size=(k, z))) if z else None
    return u, w, beta


@pytest.fixture(params=sorted(_kernels.available_backends()))
def kernel_backend(request):
    """Run the test once per available kernel backend."""
    previous = _kernels.active_backend()
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(previous)


@pytest.fixture
def two_node_hypergraph():
    """Single pair edge with weight 1: the hand-checkable fixture."""
    return build_hypergraph([(["0", "1"], 1)])


def as_hypergraph(num_nodes, edge_list, weights=None):
    if weights is None:
        weights = [1] * len(edge_list)
    raw = [([str(i) for i in e], w) for e, w in zip(edge_list, weights)]
    return build_hypergraph(raw, nodes=[str(i) for i in range(num_nodes)])
