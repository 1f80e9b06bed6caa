import numpy as np
import pytest

from hypermix.errors import NumericalError, ValidationError
from hypermix.synth import (
    DEFAULT_DIM_SEQ,
    GenConfig,
    generate_attributes,
    generate_hypergraph,
    plant_random_params,
)


def small_config(**overrides):
    base = dict(num_nodes=40, num_communities=3,
                dim_seq={2: 25, 3: 20, 4: 10, 6: 5}, rho_match=0.8, seed=7)
    base.update(overrides)
    return GenConfig(**base)


class TestGenerateHypergraph:
    def test_per_size_counts_match_request(self):
        config = small_config()
        h, truth = generate_hypergraph(config)
        sizes = {}
        for e in h.edges:
            sizes[len(e)] = sizes.get(len(e), 0) + 1
        assert sizes == dict(config.dim_seq)
        assert h.num_edges == sum(config.dim_seq.values())

    def test_nodes_distinct_and_weights_one(self):
        h, _ = generate_hypergraph(small_config())
        for e in h.edges:
            assert len(set(e)) == len(e)
        assert h.weights.tolist() == [1] * h.num_edges

    def test_deterministic_given_seed(self):
        a, truth_a = generate_hypergraph(small_config())
        b, truth_b = generate_hypergraph(small_config())
        assert a.edges == b.edges
        np.testing.assert_array_equal(truth_a.u, truth_b.u)
        np.testing.assert_array_equal(truth_a.w, truth_b.w)

    def test_distinct_seeds_differ(self):
        a, _ = generate_hypergraph(small_config(seed=1))
        b, _ = generate_hypergraph(small_config(seed=2))
        assert a.edges != b.edges

    def test_ground_truth_is_valid(self):
        _, truth = generate_hypergraph(small_config())
        truth.validate()
        assert truth.beta is None

    def test_zero_affinity_aborts(self):
        n, k = 20, 2
        config = small_config(
            num_nodes=n, num_communities=k, dim_seq={2: 4},
            planted_u=np.full((n, k), 0.5), planted_w=np.zeros((k, k)))
        with pytest.raises(NumericalError, match="zero everywhere"):
            generate_hypergraph(config)

    def test_infeasible_dimension_sequence(self):
        with pytest.raises(ValidationError, match="distinct edges"):
            small_config(num_nodes=5, dim_seq={2: 11})

    def test_size_bounds_checked(self):
        with pytest.raises(ValidationError, match="out of range"):
            small_config(dim_seq={1: 3})
        with pytest.raises(ValidationError, match="out of range"):
            small_config(num_nodes=4, dim_seq={5: 1})

    def test_user_supplied_parameters_are_used(self):
        rng = np.random.default_rng(0)
        u, w = plant_random_params(rng, 30, 2)
        config = small_config(num_nodes=30, num_communities=2,
                              dim_seq={2: 10, 3: 5},
                              planted_u=u, planted_w=w)
        _, truth = generate_hypergraph(config)
        np.testing.assert_array_equal(truth.u, u)
        np.testing.assert_array_equal(truth.w, w)

    def test_benchmark_dimension_sequence_totals(self):
        assert sum(DEFAULT_DIM_SEQ.values()) == 2720
        assert max(DEFAULT_DIM_SEQ) == 20


class TestGenerateAttributes:
    def _truth(self, rng, n=500, k=5):
        u, _ = plant_random_params(rng, n, k)
        return u

    def test_full_match_is_dominant_one_hot(self):
        rng = np.random.default_rng(0)
        u = self._truth(rng)
        x = generate_attributes(u, 1.0, 5, seed=1)
        expected = np.argmax(u, axis=1)
        np.testing.assert_array_equal(np.argmax(x.matrix, axis=1), expected)
        np.testing.assert_array_equal(x.matrix.sum(axis=1), np.ones(len(u)))

    def test_zero_match_agreement_near_chance(self):
        rng = np.random.default_rng(1)
        u = self._truth(rng)
        x = generate_attributes(u, 0.0, 5, seed=2)
        agreement = np.mean(np.argmax(x.matrix, 1) == np.argmax(u, 1))
        # Binomial(500, 1/5): three sigma is about 0.054.
        assert abs(agreement - 0.2) < 0.06

    def test_high_match_agreement_exceeds_rho(self):
        rng = np.random.default_rng(2)
        u = self._truth(rng)
        agreements = []
        for seed in range(5):
            x = generate_attributes(u, 0.9, 5, seed=seed)
            agreements.append(np.mean(np.argmax(x.matrix, 1) == np.argmax(u, 1)))
        # Expected agreement 0.9 + 0.1 / 5 = 0.92.
        assert np.mean(agreements) >= 0.9

    def test_agreement_monotone_in_rho(self):
        rng = np.random.default_rng(3)
        u = self._truth(rng)
        rhos = (0.0, 0.25, 0.5, 0.75, 1.0)
        means = []
        for rho in rhos:
            vals = [
                np.mean(np.argmax(
                    generate_attributes(u, rho, 5, seed=s).matrix, 1)
                    == np.argmax(u, 1))
                for s in range(10)
            ]
            means.append(np.mean(vals))
        diffs = np.diff(means)
        assert (diffs > -0.01).all()
        assert means[-1] > means[0] + 0.5

    def test_rows_are_one_hot(self):
        rng = np.random.default_rng(4)
        u = self._truth(rng, n=60, k=4)
        x = generate_attributes(u, 0.5, 4, seed=9)
        assert set(np.unique(x.matrix)) <= {0.0, 1.0}
        np.testing.assert_array_equal(x.matrix.sum(axis=1), np.ones(60))

    def test_width_must_match_communities(self):
        rng = np.random.default_rng(5)
        u = self._truth(rng, n=10, k=3)
        with pytest.raises(ValidationError, match="must equal"):
            generate_attributes(u, 0.5, 4, seed=0)

    def test_ties_break_to_lowest_index(self):
        u = np.array([[0.4, 0.4, 0.2]])
        x = generate_attributes(u, 1.0, 3, seed=0)
        assert np.argmax(x.matrix[0]) == 0


def test_plant_random_params_shape_and_structure():
    rng = np.random.default_rng(6)
    u, w = plant_random_params(rng, 50, 4)
    assert u.shape == (50, 4) and w.shape == (4, 4)
    assert np.array_equal(w, w.T)
    assert u.min() >= 0.0 and u.max() <= 1.0
    dominant = u.max(axis=1)
    assert dominant.min() >= 0.7  # every node has one strong membership
    # Dominant communities are balanced by construction.
    counts = np.bincount(np.argmax(u, axis=1), minlength=4)
    assert counts.max() - counts.min() <= 2
    assert (np.diag(w) > 0).all()
    off = w[~np.eye(4, dtype=bool)]
    assert off.max() <= 0.1 * w.diagonal().max()
