"""Model parameters and likelihood computations.

Structure: every possible hyperedge e carries an independent Poisson
weight with rate lam_e / kappa_{|e|}, where lam_e sums the bilinear
community affinities u_i^T w u_j over node pairs inside e.  Attributes:
each binary entry x_iz is Bernoulli with probability pi_iz = (u beta)_iz,
which stays in [0, 1] because memberships are constrained to [0, 1] and
beta columns sum to one.  The two log-likelihoods are blended with a
weight gamma in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as kern
from .errors import ValidationError
from .hypergraph import AttributeMatrix, Hypergraph

# Lower clamp for every log argument; guards zero-intensity observed edges
# and memberships saturated at the [0, 1] boundary.
LOG_CLAMP = 1e-30


@dataclass(frozen=True)
class Hyperparams:
    """Community count and structure/attribute blend weight."""

    k: int
    gamma: float

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValidationError(f"gamma must be in [0, 1], got {self.gamma}")


@dataclass(frozen=True)
class ModelParams:
    """Memberships u (N x K in [0,1]), affinity w (K x K symmetric >= 0),
    attribute mixing beta (K x Z, columns summing to 1), or None without
    attributes."""

    u: np.ndarray
    w: np.ndarray
    beta: np.ndarray | None = None

    @property
    def num_nodes(self) -> int:
        return self.u.shape[0]

    @property
    def k(self) -> int:
        return self.u.shape[1]

    @property
    def z(self) -> int:
        return self.beta.shape[1] if self.beta is not None else 0

    def validate(self) -> None:
        u, w = np.asarray(self.u), np.asarray(self.w)
        if u.ndim != 2 or w.shape != (u.shape[1], u.shape[1]):
            raise ValidationError(f"shape mismatch: u {u.shape}, w {w.shape}")
        if u.min(initial=0.0) < 0.0 or u.max(initial=0.0) > 1.0:
            raise ValidationError("membership entries must lie in [0, 1]")
        if w.min(initial=0.0) < 0.0:
            raise ValidationError("affinity entries must be nonnegative")
        if not np.allclose(w, w.T, rtol=1e-9, atol=1e-12):
            raise ValidationError("affinity matrix must be symmetric")
        if self.beta is not None:
            beta = np.asarray(self.beta)
            if beta.ndim != 2 or beta.shape[0] != u.shape[1]:
                raise ValidationError(f"beta shape {beta.shape} incompatible with k")
            if beta.min(initial=0.0) < 0.0:
                raise ValidationError("beta entries must be nonnegative")
            if not np.allclose(beta.sum(axis=0), 1.0, atol=1e-6):
                raise ValidationError("beta columns must sum to 1")


def log_kappa(d: int, num_nodes: int) -> float:
    """log of the per-size normalizer d(d-1)/2 * binom(N-2, d-2).

    Stays in log space: the binomial overflows 64-bit floats for the
    large edge sizes seen in gene/disease-style data.
    """
    if d < 2:
        raise ValidationError(f"edge size must be >= 2, got {d}")
    if d > num_nodes:
        raise ValidationError(f"edge size {d} exceeds node count {num_nodes}")
    log_binom = (math.lgamma(num_nodes - 1) - math.lgamma(d - 1)
                 - math.lgamma(num_nodes - d + 1))
    return math.log(d * (d - 1) / 2.0) + log_binom


def kappa(d: int, num_nodes: int) -> float:
    return math.exp(log_kappa(d, num_nodes))


def budget_constant(num_nodes: int, max_size: int) -> float:
    """Coefficient of the all-pairs penalty term in the structural
    log-likelihood.

    The defining sum over edge sizes telescopes: each size-d term is
    binom(N-2, d-2) / kappa_d = 2 / (d (d-1)), so the total is 2 (1 - 1/D)
    and depends on the node count only through that cancellation.
    """
    if max_size < 2:
        raise ValidationError(f"max edge size must be >= 2, got {max_size}")
    return 2.0 * (1.0 - 1.0 / max_size)


@dataclass(frozen=True)
class StructuralConstants:
    """Size-dependent likelihood constants, fixed once per dataset.

    Computed from the full data before any train/test split so that
    every fold optimizes a comparable objective.
    """

    num_nodes: int
    max_size: int
    budget: float

    @classmethod
    def from_hypergraph(cls, h: Hypergraph) -> "StructuralConstants":
        return cls.from_sizes(h.num_nodes, h.max_size)

    @classmethod
    def from_sizes(cls, num_nodes: int, max_size: int) -> "StructuralConstants":
        return cls(num_nodes=num_nodes, max_size=max_size,
                   budget=budget_constant(num_nodes, max_size))

    def log_kappa(self, d: int) -> float:
        return log_kappa(d, self.num_nodes)


def edge_intensity(e: Sequence[int], u: np.ndarray, w: np.ndarray) -> float:
    """Intensity lam_e = sum_{i<j in e} u_i^T w u_j of a single node set."""
    idx = np.asarray(e, dtype=np.int64)
    if idx.size < 2:
        raise ValidationError(f"edge needs at least 2 nodes, got {idx.size}")
    ue = u[idx]
    s = ue.sum(axis=0)
    q = np.einsum("ik,kq,iq->", ue, w, ue)
    return float(0.5 * (s @ w @ s - q))


def allpairs_bilinear(u: np.ndarray, w: np.ndarray) -> float:
    """sum_{i<j in V} u_i^T w u_j via the aggregate identity (O(N K + K^2))."""
    s = u.sum(axis=0)
    q = np.einsum("ik,kq,iq->", u, w, u)
    return float(0.5 * (s @ w @ s - q))


def loglik_structure(
    h: Hypergraph,
    u: np.ndarray,
    w: np.ndarray,
    constants: StructuralConstants | None = None,
    diagnostics: dict | None = None,
) -> float:
    """Structural log-likelihood, parameter-independent constants dropped.

    -C * sum_{i<j in V} u_i^T w u_j  +  sum_{e in E} A_e log lam_e
    """
    if constants is None:
        constants = StructuralConstants.from_hypergraph(h)
    lam = kern.edge_intensities(h.edge_offsets, h.edge_members, u, w)
    n_clamped = int(np.count_nonzero(lam < LOG_CLAMP))
    if diagnostics is not None and n_clamped:
        diagnostics["zero_intensity_edges"] = (
            diagnostics.get("zero_intensity_edges", 0) + n_clamped)
    edge_term = float(h.weights @ np.log(np.maximum(lam, LOG_CLAMP)))
    return -constants.budget * allpairs_bilinear(u, w) + edge_term


def attribute_prob(u: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Bernoulli means pi_iz = sum_k u_ik beta_kz (in [0, 1] by the
    parameter constraints)."""
    return u @ beta


def loglik_attributes(x: AttributeMatrix, u: np.ndarray, beta: np.ndarray) -> float:
    """Bernoulli log-likelihood of the one-hot attribute matrix."""
    xm = x.matrix
    pi = np.clip(u @ beta, LOG_CLAMP, 1.0)
    pi_c = np.clip((1.0 - u) @ beta, LOG_CLAMP, 1.0)
    return float(np.sum(xm * np.log(pi) + (1.0 - xm) * np.log(pi_c)))


def total_loglik(
    h: Hypergraph,
    x: AttributeMatrix | None,
    params: ModelParams,
    gamma: float,
    constants: StructuralConstants | None = None,
) -> float:
    """(1 - gamma) * L_structure + gamma * L_attributes."""
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError(f"gamma must be in [0, 1], got {gamma}")
    total = 0.0
    if gamma < 1.0:
        total += (1.0 - gamma) * loglik_structure(h, params.u, params.w, constants)
    if gamma > 0.0:
        if x is None or params.beta is None:
            raise ValidationError("gamma > 0 requires attributes and beta")
        total += gamma * loglik_attributes(x, params.u, params.beta)
    return total
