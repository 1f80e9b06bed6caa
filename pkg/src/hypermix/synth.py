"""Synthetic attributed hypergraphs with planted overlapping communities.

Hyperedges are drawn per size by rejection sampling against the planted
intensity: uniform candidate node sets are accepted with probability
lam_e / lam_max, where lam_max starts from a pilot batch and is bumped
whenever a candidate exceeds it.  Exactly the requested number of
distinct sets is kept per size, all with weight 1.  Attributes start as
the one-hot of each node's dominant planted community; an independently
chosen fraction (1 - rho_match) of nodes then gets a uniformly random
replacement (which may coincide with the original).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _kernels as kern
from .errors import NumericalError, ValidationError
from .hypergraph import AttributeGroup, AttributeMatrix, Hypergraph, build_hypergraph
from .model import ModelParams

logger = logging.getLogger(__name__)

# Desk-scale benchmark dimension sequence: 2720 hyperedges over 500 nodes.
DEFAULT_DIM_SEQ: dict[int, int] = {
    2: 300, 3: 300, 4: 200, 5: 200, 6: 150, 7: 150, 8: 150, 9: 150,
    10: 120, 11: 120, 12: 120, 13: 120, 14: 100, 15: 100, 16: 100, 17: 100,
    18: 80, 19: 80, 20: 80,
}

_PILOT_SIZE = 1000
_MIN_ACCEPT_RATE = 1e-6
# Random planted parameters: one dominant membership per node, weakly
# assortative mixing elsewhere.
_DOMINANT_LOW, _DOMINANT_HIGH = 0.7, 1.0
_SECONDARY_HIGH = 0.35
_DIAG_LOW, _DIAG_HIGH = 0.5, 1.0
_OFFDIAG_FRACTION = 0.1


@dataclass(frozen=True)
class GenConfig:
    """Generator settings; planted parameters are drawn unless supplied."""

    num_nodes: int
    num_communities: int
    dim_seq: Mapping[int, int] = field(default_factory=lambda: dict(DEFAULT_DIM_SEQ))
    rho_match: float = 1.0
    seed: int = 0
    planted_u: np.ndarray | None = None
    planted_w: np.ndarray | None = None

    def __post_init__(self):
        if self.num_nodes < 2 or self.num_communities < 1:
            raise ValidationError("need at least 2 nodes and 1 community")
        if not self.dim_seq or sum(self.dim_seq.values()) < 1:
            raise ValidationError("dimension sequence must request edges")
        for d, m in self.dim_seq.items():
            if d < 2 or d > self.num_nodes:
                raise ValidationError(f"edge size {d} out of range [2, N]")
            if m < 1:
                raise ValidationError(f"count for size {d} must be positive")
            if m > math.comb(self.num_nodes, d):
                raise ValidationError(
                    f"cannot place {m} distinct edges of size {d} on "
                    f"{self.num_nodes} nodes")
        if not 0.0 <= self.rho_match <= 1.0:
            raise ValidationError("rho_match must be in [0, 1]")
        if (self.planted_u is None) != (self.planted_w is None):
            raise ValidationError("supply both planted_u and planted_w or neither")

    def to_dict(self) -> dict:
        return {
            "num_nodes": self.num_nodes,
            "num_communities": self.num_communities,
            "dim_seq": {str(d): m for d, m in sorted(self.dim_seq.items())},
            "rho_match": self.rho_match,
            "seed": self.seed,
            "planted_u": None if self.planted_u is None else self.planted_u.tolist(),
            "planted_w": None if self.planted_w is None else self.planted_w.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GenConfig":
        return cls(
            num_nodes=int(doc["num_nodes"]),
            num_communities=int(doc["num_communities"]),
            dim_seq={int(d): int(m) for d, m in doc["dim_seq"].items()},
            rho_match=float(doc.get("rho_match", 1.0)),
            seed=int(doc.get("seed", 0)),
            planted_u=(np.asarray(doc["planted_u"], dtype=np.float64)
                       if doc.get("planted_u") is not None else None),
            planted_w=(np.asarray(doc["planted_w"], dtype=np.float64)
                       if doc.get("planted_w") is not None else None),
        )


def plant_random_params(rng: np.random.Generator, n: int, k: int):
    """Random ground truth: balanced dominant communities, assortative w."""
    u = rng.uniform(0.0, _SECONDARY_HIGH, size=(n, k))
    dominant = rng.permutation(np.arange(n) % k)
    u[np.arange(n), dominant] = rng.uniform(_DOMINANT_LOW, _DOMINANT_HIGH, size=n)
    diag = rng.uniform(_DIAG_LOW, _DIAG_HIGH, size=k)
    w = np.zeros((k, k))
    for a in range(k):
        w[a, a] = diag[a]
        for b in range(a + 1, k):
            w[a, b] = w[b, a] = rng.uniform(
                0.0, _OFFDIAG_FRACTION * math.sqrt(diag[a] * diag[b]))
    return u, w


def _candidate_batch(rng: np.random.Generator, batch: int, n: int, d: int):
    """Uniform distinct-node sets: the d smallest of iid uniforms per row."""
    keys = rng.random((batch, n))
    cand = np.argpartition(keys, d - 1, axis=1)[:, :d]
    return np.sort(cand, axis=1)


def _batch_intensities(cand: np.ndarray, u, w) -> np.ndarray:
    batch, d = cand.shape
    offsets = np.arange(0, (batch + 1) * d, d, dtype=np.int64)
    return kern.edge_intensities(offsets, cand.ravel(), u, w)


def _sample_size_class(rng, n, d, m, u, w):
    """Accept m distinct size-d sets by rejection against lam / lam_max."""
    pilot = _candidate_batch(rng, _PILOT_SIZE, n, d)
    lam_max = float(_batch_intensities(pilot, u, w).max())
    if lam_max <= 0.0:
        raise NumericalError(
            f"planted intensity is zero everywhere for size {d}; "
            "increase the planted affinity scale")
    accepted: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    draws = 0
    batch = max(1024, 4 * m)
    while len(accepted) < m:
        cand = _candidate_batch(rng, batch, n, d)
        lam = _batch_intensities(cand, u, w)
        coins = rng.random(batch)
        for row, lam_e, coin in zip(cand, lam, coins):
            if lam_e > lam_max:
                lam_max = float(lam_e)
            if coin * lam_max > lam_e:
                continue
            key = tuple(int(i) for i in row)
            if key in seen:
                continue
            seen.add(key)
            accepted.append(key)
            if len(accepted) == m:
                break
        draws += batch
        if draws >= 10 * _PILOT_SIZE and len(accepted) / draws < _MIN_ACCEPT_RATE:
            raise NumericalError(
                f"acceptance rate below {_MIN_ACCEPT_RATE:g} for size {d}; "
                "adjust the planted affinity scale")
    logger.info("size %d: accepted %d/%d draws (rate %.3g)", d, m, draws,
                m / max(draws, 1))
    return accepted


def generate_hypergraph(config: GenConfig) -> tuple[Hypergraph, ModelParams]:
    """Sample a hypergraph with exactly the per-size counts of ``dim_seq``.

    Returns the hypergraph (node labels "0".."N-1") and the planted
    ground-truth parameters.  Each size class samples from its own
    Philox substream, so outputs do not depend on scheduling.
    """
    root = np.random.SeedSequence(config.seed)
    sizes = sorted(config.dim_seq)
    params_stream, *size_streams = root.spawn(1 + len(sizes))
    if config.planted_u is not None:
        u, w = np.asarray(config.planted_u, float), np.asarray(config.planted_w, float)
        if u.shape != (config.num_nodes, config.num_communities):
            raise ValidationError(f"planted_u shape {u.shape} mismatch")
    else:
        rng = np.random.Generator(np.random.Philox(params_stream))
        u, w = plant_random_params(rng, config.num_nodes, config.num_communities)
    truth = ModelParams(u=u, w=w, beta=None)
    truth.validate()

    raw_edges = []
    for d, stream in zip(sizes, size_streams):
        rng_d = np.random.Generator(np.random.Philox(stream))
        for key in _sample_size_class(rng_d, config.num_nodes, d,
                                      config.dim_seq[d], u, w):
            raw_edges.append(([str(i) for i in key], 1))
    h = build_hypergraph(raw_edges, nodes=[str(i) for i in range(config.num_nodes)])
    return h, truth


def generate_attributes(
    u_truth: np.ndarray,
    rho_match: float,
    z: int,
    seed: int | np.random.Generator = 0,
) -> AttributeMatrix:
    """One attribute per node: its dominant community, partially shuffled.

    Requires z equal to the community count.  Each node independently
    keeps its matching attribute with probability ``rho_match``,
    otherwise it is replaced by a uniformly random one-hot row.
    """
    u_truth = np.asarray(u_truth, dtype=np.float64)
    n, k = u_truth.shape
    if z != k:
        raise ValidationError(f"attribute width z={z} must equal k={k}")
    if not 0.0 <= rho_match <= 1.0:
        raise ValidationError("rho_match must be in [0, 1]")
    rng = (seed if isinstance(seed, np.random.Generator)
           else np.random.Generator(np.random.Philox(seed)))
    labels = np.argmax(u_truth, axis=1)
    shuffle = rng.random(n) < (1.0 - rho_match)
    labels = labels.copy()
    labels[shuffle] = rng.integers(k, size=int(shuffle.sum()))
    matrix = np.zeros((n, k))
    matrix[np.arange(n), labels] = 1.0
    group = AttributeGroup(name="community",
                           levels=tuple(f"c{j}" for j in range(k)), start=0)
    return AttributeMatrix(matrix=matrix, groups=(group,))
