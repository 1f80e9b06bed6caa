# cython: language_level=3, boundscheck=False, wraparound=False
# cython: cdivision=True, initializedcheck=False
"""Compiled per-hyperedge kernels.

Same contracts as ``reference.py``; the per-edge passes run as C loops
over the flat CSR layout, with BLAS-bound pre/post steps left to numpy.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"

ctypedef cnp.int64_t idx_t


def edge_intensities(const idx_t[::1] offsets, const idx_t[::1] members,
                     const double[:, ::1] u, const double[:, ::1] w):
    cdef Py_ssize_t n_edges = offsets.shape[0] - 1
    cdef Py_ssize_t k_dim = u.shape[1]
    if n_edges < 0:
        n_edges = 0
    lam_arr = np.zeros(n_edges)
    s_arr = np.empty(k_dim)
    # Per-node quadratic u_i^T w u_i, one BLAS pass.
    q_arr = np.einsum("ik,ik->i", np.asarray(u) @ np.asarray(w), np.asarray(u))
    cdef double[::1] lam = lam_arr
    cdef double[::1] s = s_arr
    cdef const double[::1] q = q_arr
    cdef Py_ssize_t e, p, i, k, l
    cdef idx_t lo, hi
    cdef double qsum, acc, row
    with nogil:
        for e in range(n_edges):
            lo = offsets[e]
            hi = offsets[e + 1]
            for k in range(k_dim):
                s[k] = 0.0
            qsum = 0.0
            for p in range(lo, hi):
                i = members[p]
                qsum += q[i]
                for k in range(k_dim):
                    s[k] += u[i, k]
            acc = 0.0
            for k in range(k_dim):
                row = 0.0
                for l in range(k_dim):
                    row += w[k, l] * s[l]
                acc += s[k] * row
            lam[e] = 0.5 * (acc - qsum)
    return lam_arr


def membership_numerators(const idx_t[::1] offsets, const idx_t[::1] members,
                          const double[::1] coef, const double[:, ::1] u,
                          const double[:, ::1] w):
    cdef Py_ssize_t n_edges = offsets.shape[0] - 1
    cdef Py_ssize_t n_nodes = u.shape[0]
    cdef Py_ssize_t k_dim = u.shape[1]
    if n_edges < 0:
        n_edges = 0
    out_arr = np.zeros((n_nodes, k_dim))
    s_arr = np.empty(k_dim)
    ws_arr = np.empty(k_dim)
    uw_arr = np.asarray(u) @ np.asarray(w)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] s = s_arr
    cdef double[::1] ws = ws_arr
    cdef const double[:, ::1] uw = uw_arr
    cdef Py_ssize_t e, p, i, k, l
    cdef idx_t lo, hi
    cdef double c_e, row
    with nogil:
        for e in range(n_edges):
            lo = offsets[e]
            hi = offsets[e + 1]
            c_e = coef[e]
            for k in range(k_dim):
                s[k] = 0.0
            for p in range(lo, hi):
                i = members[p]
                for k in range(k_dim):
                    s[k] += u[i, k]
            for k in range(k_dim):
                row = 0.0
                for l in range(k_dim):
                    row += w[k, l] * s[l]
                ws[k] = row
            for p in range(lo, hi):
                i = members[p]
                for k in range(k_dim):
                    out[i, k] += c_e * (ws[k] - uw[i, k])
    return out_arr


def affinity_numerators(const idx_t[::1] offsets, const idx_t[::1] members,
                        const double[::1] coef, const double[:, ::1] u):
    cdef Py_ssize_t n_edges = offsets.shape[0] - 1
    cdef Py_ssize_t n_nodes = u.shape[0]
    cdef Py_ssize_t k_dim = u.shape[1]
    if n_edges < 0:
        n_edges = 0
    acc_arr = np.zeros((k_dim, k_dim))
    tdeg_arr = np.zeros(n_nodes)
    s_arr = np.empty(k_dim)
    cdef double[:, ::1] acc = acc_arr
    cdef double[::1] tdeg = tdeg_arr
    cdef double[::1] s = s_arr
    cdef Py_ssize_t e, p, i, k, l
    cdef idx_t lo, hi
    cdef double c_e
    with nogil:
        for e in range(n_edges):
            lo = offsets[e]
            hi = offsets[e + 1]
            c_e = coef[e]
            for k in range(k_dim):
                s[k] = 0.0
            for p in range(lo, hi):
                i = members[p]
                tdeg[i] += c_e
                for k in range(k_dim):
                    s[k] += u[i, k]
            for k in range(k_dim):
                for l in range(k, k_dim):
                    acc[k, l] += c_e * s[k] * s[l]
    u_arr = np.asarray(u)
    m = 0.5 * (acc_arr - (tdeg_arr[:, None] * u_arr).T @ u_arr)
    out = np.empty((k_dim, k_dim))
    iu = np.triu_indices(k_dim)
    out[iu] = m[iu]
    out.T[iu] = m[iu]
    return out
