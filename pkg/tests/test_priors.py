import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from bdclust.core import MedoidSet, Partition
from bdclust.exact import all_medoid_sets, set_partitions
from bdclust.priors import (
    AlphaPosterior,
    AlphaPriorConfig,
    MedoidPriorConfig,
    NonFiniteDistance,
    PYConfig,
    log_medoid_prior,
    log_penalty_C,
    log_py_eppf,
    log_tgeom,
    partition_distance,
    py_predictive_weights,
    rand_index,
    sample_alpha_posterior,
)


def crp_probability(labels, m, discount):
    """Sequential seating probability of a canonical label vector."""
    prob = 1.0
    sizes: list[int] = []
    for i, c in enumerate(labels):
        if c == len(sizes):
            prob *= (m + discount * len(sizes)) / (m + i)
            sizes.append(1)
        else:
            prob *= (sizes[c] - discount) / (m + i)
            sizes[c] += 1
    return prob


def penalty_quadrature(d, a, b):
    f = lambda x: math.exp(-d * x / (1 - x)) * stats.beta.pdf(x, a, b)  # noqa: E731
    return integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-12, limit=500, points=[1e-6, 1e-3, 0.5])[0]


class TestMedoidPrior:
    def test_single_object(self):
        assert log_medoid_prior(MedoidSet((0,)), MedoidPriorConfig(0.5, 1)) == 0.0

    def test_exact_rational(self):
        expect = Fraction(1, 6) * Fraction(1, 4) / Fraction(15, 16)
        got = log_medoid_prior(MedoidSet((0, 2)), MedoidPriorConfig(0.5, 4))
        assert got == pytest.approx(math.log(expect), abs=1e-14)

    @pytest.mark.parametrize("n", [1, 4, 7, 10])
    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    def test_sums_to_one(self, n, p):
        cfg = MedoidPriorConfig(p, n)
        total = sum(math.exp(log_medoid_prior(MedoidSet(g), cfg)) for g in all_medoid_sets(n))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_tgeom_normalised(self):
        k = np.arange(1, 31)
        assert np.exp(log_tgeom(k, 0.2, 30)).sum() == pytest.approx(1.0, abs=1e-14)

    def test_bad_p(self):
        with pytest.raises(ValueError):
            MedoidPriorConfig(1.0, 3)


class TestEPPF:
    def test_single_object(self):
        assert log_py_eppf([1], PYConfig(1.0, 0.3)) == 0.0

    def test_dirichlet_case_matches_seating(self):
        got = math.exp(log_py_eppf([2, 2], PYConfig(1.0, 0.0)))
        assert got == pytest.approx(crp_probability([0, 0, 1, 1], 1.0, 0.0), abs=1e-15)

    @pytest.mark.parametrize("m,disc", [(1.0, 0.0), (1.0, 0.3), (0.5, 0.7), (2.0, 0.01)])
    def test_matches_seating_and_sums_to_one(self, m, disc):
        cfg = PYConfig(m, disc)
        parts = list(set_partitions(5))
        assert len(parts) == 52
        probs = [math.exp(log_py_eppf(np.bincount(p), cfg)) for p in parts]
        for p, v in zip(parts, probs):
            assert v == pytest.approx(crp_probability(p, m, disc), rel=1e-12)
        assert sum(probs) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(1, 6), min_size=1, max_size=6), st.randoms())
    def test_symmetric_in_sizes(self, sizes, rnd):
        cfg = PYConfig(0.8, 0.25)
        shuffled = sizes[:]
        rnd.shuffle(shuffled)
        assert log_py_eppf(sizes, cfg) == pytest.approx(log_py_eppf(shuffled, cfg), abs=1e-12)

    def test_predictive_weights_are_eppf_ratios(self):
        cfg = PYConfig(1.3, 0.4)
        sizes = [3, 1, 2]
        w = py_predictive_weights(sizes, cfg)
        base = log_py_eppf(sizes, cfg)
        ratios = []
        for c in range(len(sizes)):
            grown = sizes[:]
            grown[c] += 1
            ratios.append(math.exp(log_py_eppf(grown, cfg) - base))
        ratios.append(math.exp(log_py_eppf(sizes + [1], cfg) - base))
        np.testing.assert_allclose(w / w.sum(), ratios, rtol=1e-12)


class TestPartitionDistance:
    def test_identical(self):
        t = Partition.from_labels([0, 1, 1, 2])
        assert partition_distance(t, t) == 0.0

    def test_three_objects(self):
        t1 = Partition.from_labels([0, 0, 1])
        t2 = Partition.from_labels([0, 1, 1])
        assert rand_index(t1, t2) == pytest.approx(1 / 3)
        assert partition_distance(t1, t2) == pytest.approx(2.0)

    def test_total_disagreement(self):
        assert partition_distance(Partition.from_labels([0, 0]), Partition.from_labels([0, 1])) == math.inf

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=2, max_size=9), st.data())
    def test_rand_index_brute_force(self, a, data):
        b = data.draw(st.lists(st.integers(0, 3), min_size=len(a), max_size=len(a)))
        t1, t2 = Partition.from_labels(a), Partition.from_labels(b)
        pairs = list(itertools.combinations(range(len(a)), 2))
        agree = sum((a[i] == a[j]) == (b[i] == b[j]) for i, j in pairs)
        assert rand_index(t1, t2) == pytest.approx(agree / len(pairs), abs=1e-12)
        assert partition_distance(t1, t2) == partition_distance(t2, t1)
        assert (partition_distance(t1, t2) == 0) == (agree == len(pairs))


class TestPenalty:
    def test_zero_distance(self):
        assert log_penalty_C(0.0, AlphaPriorConfig(2.0, 3.0)) == 0.0

    @pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 2.0), (0.5, 3.0), (3.0, 0.5)])
    @pytest.mark.parametrize("d", [0.01, 0.1, 1.0, 10.0])
    def test_against_alpha_quadrature(self, a, b, d):
        ref = penalty_quadrature(d, a, b)
        assert math.exp(log_penalty_C(d, AlphaPriorConfig(a, b))) == pytest.approx(ref, rel=1e-6)

    def test_decreasing(self):
        cfg = AlphaPriorConfig(1.5, 2.0)
        vals = [log_penalty_C(d, cfg) for d in np.geomspace(1e-3, 1e3, 30)]
        assert np.all(np.diff(vals) < 0)

    def test_limits(self):
        cfg = AlphaPriorConfig()
        assert log_penalty_C(math.inf, cfg) == -math.inf
        with pytest.raises(NonFiniteDistance):
            log_penalty_C(-1.0, cfg)


class TestAlphaPosterior:
    def test_zero_distance_is_beta(self):
        draws = sample_alpha_posterior(0.0, AlphaPriorConfig(2.0, 5.0), np.random.default_rng(0), 10_000)
        assert stats.kstest(draws, stats.beta(2.0, 5.0).cdf).pvalue > 0.01

    def test_large_distance_concentrates_near_zero(self):
        draws = sample_alpha_posterior(1e3, AlphaPriorConfig(1.0, 1.0), np.random.default_rng(1), 10_000)
        assert draws.mean() < 0.01

    def test_moments_against_quadrature(self):
        a, b, d = 2.0, 2.0, 1.0
        w = lambda x: math.exp(-d * x / (1 - x)) * x ** (a - 1) * (1 - x) ** (b - 1)  # noqa: E731
        z = integrate.quad(w, 0, 1)[0]
        m1 = integrate.quad(lambda x: x * w(x), 0, 1)[0] / z
        m2 = integrate.quad(lambda x: x * x * w(x), 0, 1)[0] / z
        draws = sample_alpha_posterior(d, AlphaPriorConfig(a, b), np.random.default_rng(2), 10_000)
        se = math.sqrt((m2 - m1**2) / len(draws))
        assert abs(draws.mean() - m1) < 3 * se
        assert AlphaPosterior(d, AlphaPriorConfig(a, b)).mean() == pytest.approx(m1, abs=1e-5)

    def test_infinite_distance(self):
        draws = sample_alpha_posterior(math.inf, AlphaPriorConfig(), np.random.default_rng(0), 5)
        assert np.all(draws == 0.0)
