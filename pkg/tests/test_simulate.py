import numpy as np
import pytest
from scipy import stats

from bdclust.core import validate_distance_matrix
from bdclust.kmedoids import pam
from bdclust.posterior import adjusted_rand
from bdclust.simulate import (
    DegenerateDistances,
    SimConfig,
    centers_standard_simplex,
    euclidean_distances,
    gamma_quantile_transform,
    simulate_two_layer,
)

from conftest import random_distances


class TestCenters:
    def test_two_dims(self):
        np.testing.assert_array_equal(centers_standard_simplex(2, 2), [[1, 0], [0, 1]])

    def test_equidistant(self):
        c = centers_standard_simplex(10, 10)
        np.testing.assert_array_equal(c, np.eye(10))
        d = euclidean_distances(c).values
        np.testing.assert_allclose(d[~np.eye(10, dtype=bool)], np.sqrt(2))


class TestSimulation:
    def test_shapes_and_validity(self):
        out = simulate_two_layer(SimConfig(n=50, seed=1))
        assert out.x1.shape == (50, 10) and out.x2.shape == (50, 10)
        assert out.d1.n == 50 and out.d2.n == 50
        validate_distance_matrix(out.d1.values)

    def test_full_copy(self):
        out = simulate_two_layer(SimConfig(alpha_s=1.0, seed=2))
        np.testing.assert_array_equal(out.z1_true, out.z2_true)

    @pytest.mark.parametrize("alpha_s", [0.0, 0.3, 0.7])
    def test_copy_fraction_lower_bound(self, alpha_s):
        for seed in range(10):
            out = simulate_two_layer(SimConfig(alpha_s=alpha_s, seed=seed))
            assert np.mean(out.z1_true == out.z2_true) >= alpha_s

    def test_layer_two_is_a_permutation_of_labels(self):
        out = simulate_two_layer(SimConfig(alpha_s=0.0, seed=3))
        assert sorted(out.z1_true) == sorted(out.z2_true)

    def test_bit_reproducible(self):
        a = simulate_two_layer(SimConfig(sigma_s=0.2, alpha_s=0.5, seed=7))
        b = simulate_two_layer(SimConfig(sigma_s=0.2, alpha_s=0.5, seed=7))
        np.testing.assert_array_equal(a.d1.values, b.d1.values)
        np.testing.assert_array_equal(a.z2_true, b.z2_true)

    def test_well_separated_regime(self):
        # balanced cluster weights, so all ten clusters are populated
        for seed in range(5):
            out = simulate_two_layer(SimConfig(sigma_s=0.1, dirichlet_alpha=10.0, seed=seed))
            assert adjusted_rand(pam(out.d1, 10).labels, out.z1_true) >= 0.9

    def test_bad_config(self):
        with pytest.raises(ValueError):
            SimConfig(sigma_s=0.0)
        with pytest.raises(ValueError):
            SimConfig(n=5)


class TestGammaTransform:
    def test_positive_and_symmetric(self):
        d = gamma_quantile_transform(random_distances(20, seed=1))
        off = d.values[~np.eye(20, dtype=bool)]
        assert np.all(off > 0) and np.all(np.isfinite(off))
        np.testing.assert_array_equal(d.values, d.values.T)
        assert np.all(np.diag(d.values) == 0)

    def test_monotone(self):
        d = random_distances(15, seed=2)
        out = gamma_quantile_transform(d)
        iu = np.triu_indices(15, 1)
        order = np.argsort(d.values[iu])
        assert np.all(np.diff(out.values[iu][order]) >= 0)

    def test_normal_inputs_become_gamma(self):
        n = 450
        rng = np.random.default_rng(0)
        z = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        z[iu] = 10.0 + rng.standard_normal(len(iu[0]))
        z = z + z.T
        out = gamma_quantile_transform(validate_distance_matrix(z))
        res = stats.kstest(out.values[iu], stats.gamma(3.0, scale=1 / 5.0).cdf)
        assert res.statistic < 0.02

    def test_constant_input(self):
        x = np.ones((4, 4)) - np.eye(4)
        with pytest.raises(DegenerateDistances):
            gamma_quantile_transform(validate_distance_matrix(x))
