"""Benchmark the compiled kernels against the numpy fallback.

Generates a synthetic hypergraph, then times the three per-edge kernels
and one full EM sweep under every available backend.

    python benchmarks/kernel_benchmark.py --nodes 2000 --edges 20000 --k 8
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hypermix import _kernels
from hypermix.em import em_iteration
from hypermix.hypergraph import AttributeGroup, AttributeMatrix, build_hypergraph
from hypermix.model import ModelParams, StructuralConstants


def make_inputs(num_nodes, num_edges, k, z, seed):
    rng = np.random.default_rng(seed)
    edges = {}
    while len(edges) < num_edges:
        size = int(rng.integers(2, 9))
        key = tuple(sorted(rng.choice(num_nodes, size=size, replace=False)))
        edges.setdefault(key, int(rng.integers(1, 4)))
    raw = [([str(i) for i in key], wt) for key, wt in edges.items()]
    h = build_hypergraph(raw, nodes=[str(i) for i in range(num_nodes)])
    u = rng.uniform(0.01, 0.99, size=(num_nodes, k))
    half = rng.uniform(0.05, 1.0, size=(k, k))
    w = 0.5 * (half + half.T)
    beta = rng.uniform(0.05, 1.0, size=(k, z))
    beta /= beta.sum(axis=0, keepdims=True)
    matrix = np.zeros((num_nodes, z))
    matrix[np.arange(num_nodes), rng.integers(z, size=num_nodes)] = 1.0
    x = AttributeMatrix(matrix=matrix, groups=(
        AttributeGroup("cov", tuple(str(j) for j in range(z)), 0),))
    return h, x, ModelParams(u=u, w=w, beta=beta)


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--edges", type=int, default=20000)
    parser.add_argument("--k", type=int, default=8)
    parser.add_argument("--z", type=int, default=6)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    h, x, params = make_inputs(args.nodes, args.edges, args.k, args.z, args.seed)
    constants = StructuralConstants.from_hypergraph(h)
    coef = h.weights / np.maximum(
        _kernels.edge_intensities(h.edge_offsets, h.edge_members,
                                  params.u, params.w), 1e-30)
    print(f"N={h.num_nodes} |E|={h.num_edges} incidences={h.total_incidence} "
          f"K={args.k} Z={args.z}")
    header = f"{'kernel':<24}" + "".join(
        f"{name:>14}" for name in _kernels.available_backends())
    print(header)
    print("-" * len(header))

    cases = {
        "edge_intensities": lambda: _kernels.edge_intensities(
            h.edge_offsets, h.edge_members, params.u, params.w),
        "membership_numerators": lambda: _kernels.membership_numerators(
            h.edge_offsets, h.edge_members, coef, params.u, params.w),
        "affinity_numerators": lambda: _kernels.affinity_numerators(
            h.edge_offsets, h.edge_members, coef, params.u),
        "full EM sweep": lambda: em_iteration(h, x, params, 0.5, constants),
    }
    original = _kernels.active_backend()
    try:
        for label, fn in cases.items():
            cells = []
            for name in _kernels.available_backends():
                _kernels.set_backend(name)
                fn()  # warmup
                cells.append(best_of(args.repeats, fn))
            row = f"{label:<24}" + "".join(f"{t * 1e3:>11.2f} ms" for t in cells)
            if len(cells) == 2 and cells[1] > 0:
                row += f"   ({cells[1] / cells[0]:.1f}x)"
            print(row)
    finally:
        _kernels.set_backend(original)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
