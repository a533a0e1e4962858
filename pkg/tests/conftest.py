import numpy as np
import pytest

from bdclust.core import validate_distance_matrix
from bdclust.simulate import euclidean_distances


def random_distances(n, seed=0, dim=2):
    rng = np.random.default_rng(seed)
    return euclidean_distances(rng.normal(size=(n, dim)))


def two_blobs(sizes=(4, 3), gap=2.0, spread=0.3, seed=3):
    rng = np.random.default_rng(seed)
    parts = [rng.normal(i * gap, spread, (s, 2)) for i, s in enumerate(sizes)]
    return euclidean_distances(np.concatenate(parts))


@pytest.fixture
def d7():
    return two_blobs()


@pytest.fixture
def small_matrix():
    return validate_distance_matrix([
        [0.0, 3.0, 1.0, 10.0, 4.0],
        [3.0, 0.0, 2.0, 6.0, 5.0],
        [1.0, 2.0, 0.0, 7.0, 8.0],
        [10.0, 6.0, 7.0, 0.0, 9.0],
        [4.0, 5.0, 8.0, 9.0, 0.0],
    ])


def block_oracle(x, shape, prior_shape, prior_rate):
    """log of the integral over lam of prod_i Gamma(x_i; shape, lam) Gamma(lam; prior_shape, prior_rate).

    The integrand is evaluated term by term and integrated numerically over
    lam at 30 significant digits; nothing about its closed form is used
    beyond locating the peak to split the range.
    """
    import mpmath

    if len(x) == 0:
        return 0.0
    with mpmath.workdps(30):
        xs = [mpmath.mpf(float(v)) for v in x]
        a, s, r = mpmath.mpf(shape), mpmath.mpf(prior_shape), mpmath.mpf(prior_rate)

        def log_integrand(lam):
            out = s * mpmath.log(r) - mpmath.loggamma(s) + (s - 1) * mpmath.log(lam) - r * lam
            for v in xs:
                out += a * mpmath.log(lam) - mpmath.loggamma(a) + (a - 1) * mpmath.log(v) - lam * v
            return out

        expo = len(xs) * a + s - 1
        rate = r + sum(xs)
        peak = expo / rate if expo > 0 else 1 / rate
        ref = log_integrand(peak)
        val = mpmath.quad(
            lambda lam: mpmath.exp(log_integrand(lam) - ref),
            [0, peak / 2, peak, 2 * peak, peak + 20 * (1 + mpmath.sqrt(abs(expo))) / rate, mpmath.inf],
        )
        return float(ref + mpmath.log(val))


def quadratic_oracle(d, labels, cfg):
    labels = np.asarray(labels)
    k = labels.max() + 1
    total = 0.0
    for c in range(k):
        idx = np.flatnonzero(labels == c)
        pairs = [d.clamped[i, j] for a, i in enumerate(idx) for j in idx[a + 1:]]
        total += block_oracle(pairs, cfg.delta1, cfg.mu, cfg.beta)
    if cfg.repulsion:
        for c in range(k):
            for t in range(c + 1, k):
                block = d.clamped[np.ix_(labels == c, labels == t)].ravel()
                total += block_oracle(block, cfg.delta2, cfg.zeta, cfg.gamma_rate)
    return total


def linear_oracle(d, medoids, labels, cfg):
    import mpmath

    medoids = list(medoids)
    total = 0.0
    for c, m in enumerate(medoids):
        members = [j for j in np.flatnonzero(np.asarray(labels) == c) if j != m]
        total += block_oracle([d.clamped[m, j] for j in members], cfg.delta1, cfg.mu, cfg.beta)
    if cfg.repulsion:
        a, th = mpmath.mpf(cfg.delta2), mpmath.mpf(cfg.theta_rate)
        for i, mi in enumerate(medoids):
            for mj in medoids[i + 1:]:
                x = mpmath.mpf(float(d.clamped[mi, mj]))
                total += float(a * mpmath.log(th) - mpmath.loggamma(a) + (a - 1) * mpmath.log(x) - th * x)
    return total
