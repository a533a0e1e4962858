import numpy as np
import pytest

from bdclust.core import validate_distance_matrix
from bdclust.hyper import default_k_range
from bdclust.kmedoids import (
    DegenerateRange,
    elbow_k,
    exhaustive_kmedoids,
    knee_index,
    map_equivalence_check,
    medoid_cost,
    pam,
)
from bdclust.posterior import adjusted_rand
from bdclust.simulate import SimConfig, simulate_two_layer

from conftest import random_distances, two_blobs


class TestPam:
    def test_k_equals_n(self):
        d = random_distances(6)
        res = pam(d, 6)
        assert res.cost == 0.0
        assert res.labels.k == 6

    def test_cost_is_recomputable(self):
        d = random_distances(30, seed=2)
        res = pam(d, 4)
        med = res.medoids.as_array()
        recomputed = d.values[med[res.labels.labels], np.arange(d.n)].sum()
        assert res.cost == pytest.approx(recomputed, abs=1e-9)
        assert res.cost == pytest.approx(medoid_cost(d, med), abs=1e-9)

    def test_matches_exhaustive_mostly(self):
        hits = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n, k = int(rng.integers(5, 10)), int(rng.integers(1, 4))
            d = random_distances(n, seed=seed)
            _, best = exhaustive_kmedoids(d, k)
            res = pam(d, k)
            assert res.cost >= best - 1e-9
            hits += res.cost <= best + 1e-9
        assert hits >= 80

    def test_two_blobs(self):
        d = two_blobs(sizes=(20, 20), gap=3.0, spread=0.05)
        res = pam(d, 2)
        assert adjusted_rand(res.labels, np.repeat([0, 1], 20)) == 1.0

    def test_deterministic(self):
        d = random_distances(25, seed=9)
        a, b = pam(d, 3), pam(d, 3)
        assert a.medoids == b.medoids and a.cost == b.cost

    def test_swap_never_increases_cost(self):
        d = random_distances(40, seed=1)
        for k in (2, 5, 8):
            res = pam(d, k, max_iter=0)
            assert pam(d, k).cost <= res.cost

    def test_bad_k(self):
        with pytest.raises(ValueError):
            pam(random_distances(3), 4)


class TestElbow:
    def test_flat_curve(self):
        assert knee_index([2, 3, 4, 5], [1.0, 1.0, 1.0, 1.0]) == 0

    def test_single_k(self):
        assert elbow_k(random_distances(6), (2, 2)) == 2

    def test_bad_range(self):
        with pytest.raises(DegenerateRange):
            elbow_k(random_distances(6), (3, 9))

    def test_separated_clusters(self):
        # compare with the number of clusters that actually received objects
        hits = 0
        reps = 20
        for seed in range(reps):
            sim = simulate_two_layer(SimConfig(sigma_s=0.1, seed=seed))
            k = elbow_k(sim.d1, default_k_range(sim.d1.n))
            hits += abs(k - len(np.unique(sim.z1_true))) <= 1
        assert hits >= 0.9 * reps


class TestMapEquivalence:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        d = random_distances(8, seed=seed)
        assert map_equivalence_check(d, int(rng.integers(2, 4)))

    def test_tie(self):
        # four points on a line at equal spacing: two optimal 1-medoid sets
        x = np.array([0.0, 1.0, 2.0, 3.0])
        d = validate_distance_matrix(np.abs(x[:, None] - x[None, :]))
        sets, _ = exhaustive_kmedoids(d, 1)
        assert sets == [(1,), (2,)]
        assert map_equivalence_check(d, 1)
