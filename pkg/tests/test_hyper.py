import numpy as np
import pytest

from bdclust.core import validate_distance_matrix
from bdclust.hyper import (
    DegenerateDistances,
    default_k_range,
    moment_estimates,
    select_hyperparameters,
    singleton_prefilter,
)
from bdclust.likelihood import Mode
from bdclust.simulate import SimConfig, simulate_two_layer

from conftest import random_distances


class TestMoments:
    def test_member_set_clamps_shape(self):
        est = moment_estimates([1.0, 2.0, 3.0], [2.0, 4.0])
        assert est["a_mean"] == 2.0 and est["a_var"] == 1.0
        assert est["delta1_raw"] == 4.0
        assert est["delta1"] == pytest.approx(1 - 1e-6, abs=1e-15)
        assert est["mu"] == pytest.approx(3 * est["delta1"])
        assert est["beta"] == 6.0

    def test_medoid_set(self):
        est = moment_estimates([1.0, 2.0, 3.0], [2.0, 4.0])
        assert est["b_mean"] == 3.0 and est["b_var"] == 2.0
        assert est["delta2"] == 4.5
        assert est["theta_rate"] == 1.5
        assert est["zeta"] == 9.0 and est["gamma_rate"] == 6.0

    def test_constant_members(self):
        with pytest.raises(DegenerateDistances):
            moment_estimates([1.0, 1.0, 1.0], [2.0, 4.0])

    def test_recovers_gamma_shape(self):
        rng = np.random.default_rng(0)
        a = rng.gamma(0.5, 1 / 3.0, 800)
        b = rng.gamma(5.0, 1.0, 50)
        assert 0.3 <= moment_estimates(a, b)["delta1"] <= 0.7

    def test_clamped_to_valid_shapes(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            est = moment_estimates(rng.gamma(5.0, 1.0, 30), rng.gamma(0.3, 1.0, 10))
            assert 0 < est["delta1"] < 1 and est["delta2"] > 1


class TestSelection:
    def test_on_simulated_data(self):
        sim = simulate_two_layer(SimConfig(sigma_s=0.1, seed=0))
        sel = select_hyperparameters(sim.d1)
        assert sel.cfg.mode is Mode.LINEAR
        assert 0 < sel.cfg.delta1 < 1 and sel.cfg.delta2 > 1
        assert sel.a_set_size == sim.d1.n - sel.k_elbow
        assert sel.b_set_size == sel.k_elbow * (sel.k_elbow - 1) // 2

    def test_order_invariance(self):
        d = random_distances(40, seed=3)
        perm = np.random.default_rng(3).permutation(40)
        a = select_hyperparameters(d)
        b = select_hyperparameters(d.permute(perm))
        assert a.k_elbow == b.k_elbow
        for key in ("delta1", "delta2", "mu", "beta", "theta_rate"):
            assert getattr(a.cfg, key) == pytest.approx(getattr(b.cfg, key), rel=1e-10)

    def test_too_small(self):
        with pytest.raises(DegenerateDistances):
            select_hyperparameters(random_distances(3))

    def test_default_range(self):
        assert default_k_range(100) == (2, 30)
        assert default_k_range(10) == (2, 5)


class TestPrefilter:
    def test_infinite_threshold(self):
        kept, single, sub = singleton_prefilter(random_distances(8), 0.01, np.inf)
        assert len(kept) == 8 and len(single) == 0 and sub.n == 8

    def test_zero_threshold(self):
        kept, single, _ = singleton_prefilter(random_distances(8), 0.01, 0.0)
        assert len(kept) == 0 and len(single) == 8

    def test_planted_outlier(self):
        rng = np.random.default_rng(0)
        n = 30
        x = rng.uniform(0.01, 0.1, (n, n))
        x = np.triu(x, 1)
        x = x + x.T
        x[7, :] = x[:, 7] = rng.uniform(0.5, 1.0, n)
        x[7, 7] = 0.0
        x = np.triu(x, 1) + np.triu(x, 1).T
        kept, single, sub = singleton_prefilter(validate_distance_matrix(x), 0.01, 0.15)
        assert list(single) == [7]
        # sorting oracle for the quantile of the outlier row
        row = np.sort(np.delete(x[7], 7))
        assert row[0] > 0.15
        assert sub.n == n - 1
