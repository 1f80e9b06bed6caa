"""Cross-checks of the per-edge kernels: each backend against a literal
pair-loop oracle and against the other backend."""

import itertools

import numpy as np
import pytest

from hypermix import _kernels

from conftest import random_hypergraph, random_params


def naive_edge_intensities(h, u, w):
    out = np.zeros(h.num_edges)
    for eid, e in enumerate(h.edges):
        for i, j in itertools.combinations(e, 2):
            out[eid] += u[i] @ w @ u[j]
    return out


def naive_membership_numerators(h, coef, u, w):
    out = np.zeros_like(u)
    for eid, e in enumerate(h.edges):
        s = u[list(e)].sum(axis=0)
        for i in e:
            out[i] += coef[eid] * (w @ (s - u[i]))
    return out


def naive_affinity_numerators(h, coef, u):
    k = u.shape[1]
    out = np.zeros((k, k))
    for eid, e in enumerate(h.edges):
        for i, j in itertools.combinations(e, 2):
            out += coef[eid] * 0.5 * (np.outer(u[i], u[j]) + np.outer(u[j], u[i]))
    return out


@pytest.fixture
def instance():
    rng = np.random.default_rng(17)
    h = random_hypergraph(rng, n=20, sizes=(2, 2, 2, 3, 3, 4, 5, 6, 7))
    u, w, _ = random_params(rng, 20, 4)
    coef = rng.uniform(0.1, 2.0, size=h.num_edges)
    return h, u, w, coef


def test_edge_intensities_match_oracle(instance, kernel_backend):
    h, u, w, _ = instance
    got = _kernels.edge_intensities(h.edge_offsets, h.edge_members, u, w)
    np.testing.assert_allclose(got, naive_edge_intensities(h, u, w), rtol=1e-12)


def test_membership_numerators_match_oracle(instance, kernel_backend):
    h, u, w, coef = instance
    got = _kernels.membership_numerators(h.edge_offsets, h.edge_members, coef, u, w)
    np.testing.assert_allclose(
        got, naive_membership_numerators(h, coef, u, w), rtol=1e-10, atol=1e-12)


def test_affinity_numerators_match_oracle(instance, kernel_backend):
    h, u, w, coef = instance
    got = _kernels.affinity_numerators(h.edge_offsets, h.edge_members, coef, u)
    np.testing.assert_allclose(
        got, naive_affinity_numerators(h, coef, u), rtol=1e-10, atol=1e-12)
    assert np.array_equal(got, got.T)  # exact symmetry, not just approximate


def test_empty_edge_set(kernel_backend):
    offsets = np.zeros(1, dtype=np.int64)
    members = np.zeros(0, dtype=np.int64)
    u = np.random.default_rng(0).uniform(size=(5, 3))
    w = np.eye(3)
    coef = np.zeros(0)
    assert _kernels.edge_intensities(offsets, members, u, w).shape == (0,)
    assert _kernels.membership_numerators(offsets, members, coef, u, w).max() == 0.0
    assert _kernels.affinity_numerators(offsets, members, coef, u).max() == 0.0


@pytest.mark.skipif(len(_kernels.available_backends()) < 2,
                    reason="compiled backend not built")
def test_backends_agree():
    rng = np.random.default_rng(4)
    for trial in range(10):
        n = int(rng.integers(5, 40))
        sizes = tuple(int(s) for s in rng.integers(2, min(n, 9), size=8))
        h = random_hypergraph(rng, n=n, sizes=sizes)
        k = int(rng.integers(1, 6))
        u, w, _ = random_params(rng, n, k)
        coef = rng.uniform(0.01, 3.0, size=h.num_edges)
        results = {}
        for name in _kernels.available_backends():
            _kernels.set_backend(name)
            results[name] = (
                _kernels.edge_intensities(h.edge_offsets, h.edge_members, u, w),
                _kernels.membership_numerators(
                    h.edge_offsets, h.edge_members, coef, u, w),
                _kernels.affinity_numerators(h.edge_offsets, h.edge_members, coef, u),
            )
        _kernels.set_backend(
            "compiled" if "compiled" in _kernels.available_backends() else "numpy")
        a, b = results["numpy"], results["compiled"]
        for part_a, part_b in zip(a, b):
            np.testing.assert_allclose(part_a, part_b, rtol=1e-10, atol=1e-13)


def test_backend_selection_round_trip():
    original = _kernels.active_backend()
    for name in _kernels.available_backends():
        _kernels.set_backend(name)
        assert _kernels.active_backend() == name
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")
    _kernels.set_backend(original)


def test_read_only_inputs_accepted(kernel_backend):
    # Hypergraph arrays are write-protected; kernels must accept them.
    rng = np.random.default_rng(1)
    h = random_hypergraph(rng, n=8, sizes=(2, 3, 4))
    u, w, _ = random_params(rng, 8, 2)
    u.setflags(write=False)
    w.setflags(write=False)
    lam = _kernels.edge_intensities(h.edge_offsets, h.edge_members, u, w)
    assert lam.shape == (3,)
