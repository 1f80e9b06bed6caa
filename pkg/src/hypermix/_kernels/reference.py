"""Pure numpy implementations of the per-hyperedge kernels.

All kernels take the flat CSR edge layout (``offsets``/``members``) and
work on the aggregate form of the pairwise bilinear sums: with
s_e = sum_{i in e} u_i,

    sum_{i<j in e} u_i^T w u_j = (s_e^T w s_e - sum_{i in e} u_i^T w u_i) / 2

which costs O(|e| K + K^2) per edge instead of O(|e|^2 K^2).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def _edge_sums(offsets, members, values):
    """Per-edge sums of rows (or scalars) of ``values``."""
    if len(offsets) <= 1:
        shape = (0,) + values.shape[1:]
        return np.zeros(shape, dtype=np.float64)
    return np.add.reduceat(values[members], offsets[:-1], axis=0)


def _edge_ids(offsets):
    sizes = np.diff(offsets)
    return np.repeat(np.arange(len(sizes), dtype=np.int64), sizes)


def edge_intensities(offsets, members, u, w):
    """Intensity of every edge: lam_e = sum_{i<j in e} u_i^T w u_j."""
    s = _edge_sums(offsets, members, u)
    q = np.einsum("ik,ik->i", u @ w, u)
    q_e = _edge_sums(offsets, members, q)
    return 0.5 * (np.einsum("ek,ek->e", s @ w, s) - q_e)


def membership_numerators(offsets, members, coef, u, w):
    """Per-node accumulation sum_{e: i in e} coef_e * [w (s_e - u_i)]_k.

    ``coef`` is one scalar per edge (A_e / lam_e during fitting).
    """
    n = u.shape[0]
    s = _edge_sums(offsets, members, u)
    ids = _edge_ids(offsets)
    flat = (coef[:, None] * s)[ids]
    t = np.empty_like(u)
    for k in range(u.shape[1]):
        t[:, k] = np.bincount(members, weights=flat[:, k], minlength=n)
    tdeg = np.bincount(members, weights=coef[ids], minlength=n)
    return (t - tdeg[:, None] * u) @ w


def affinity_numerators(offsets, members, coef, u):
    """Pair-moment matrix sum_e coef_e * sum_{i<j in e} (u_i u_j^T + u_j u_i^T)/2.

    Equals sum_e coef_e * (s_e s_e^T - sum_{i in e} u_i u_i^T) / 2 and is
    returned exactly symmetric (upper triangle mirrored).
    """
    n, k = u.shape
    s = _edge_sums(offsets, members, u)
    ids = _edge_ids(offsets)
    tdeg = np.bincount(members, weights=coef[ids], minlength=n)
    m = 0.5 * ((coef[:, None] * s).T @ s - (tdeg[:, None] * u).T @ u)
    out = np.empty((k, k))
    iu = np.triu_indices(k)
    out[iu] = m[iu]
    out.T[iu] = m[iu]
    return out
