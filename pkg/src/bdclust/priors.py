"""Log-priors on medoid sets and partitions, and the partition-agreement penalty."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import MedoidSet, Partition
from .numerics import log_rising, log_tricomi_u


class NonFiniteDistance(ValueError):
    pass


@dataclass(frozen=True)
class MedoidPriorConfig:
    p: float
    n: int

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass(frozen=True)
class PYConfig:
    m: float = 1.0
    discount: float = 0.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("concentration m must be positive")
        if not 0 <= self.discount < 1:
            raise ValueError("discount must lie in [0, 1)")


@dataclass(frozen=True)
class AlphaPriorConfig:
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("Beta prior parameters must be positive")


def log_tgeom(k, p: float, n: int):
    """Truncated geometric pmf on 1..n, log scale."""
    k = np.asarray(k, dtype=np.float64)
    log_norm = math.log(-math.expm1(n * math.log1p(-p)))
    return math.log(p) + (k - 1.0) * math.log1p(-p) - log_norm


def log_binom(n: int, k) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    return special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)


def log_medoid_prior_k(k, cfg: MedoidPriorConfig):
    """Prior of any single medoid set of size ``k``."""
    return -log_binom(cfg.n, k) + log_tgeom(k, cfg.p, cfg.n)


def log_medoid_prior(gamma: MedoidSet, cfg: MedoidPriorConfig) -> float:
    if not 1 <= gamma.k <= cfg.n:
        raise ValueError(f"medoid count {gamma.k} outside 1..{cfg.n}")
    return float(log_medoid_prior_k(gamma.k, cfg))


def log_py_eppf(sizes, cfg: PYConfig) -> float:
    """Pitman-Yor EPPF with a single discount, log scale."""
    sizes = [int(s) for s in sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("cluster sizes must be positive")
    k, n, sig = len(sizes), sum(sizes), cfg.discount
    out = log_rising(cfg.m + sig, k - 1, sig) - log_rising(cfg.m + 1.0, n - 1, 1.0)
    out += sum(log_rising(1.0 - sig, s - 1, 1.0) for s in sizes)
    return float(out)


def py_predictive_weights(sizes, cfg: PYConfig) -> np.ndarray:
    """Unnormalised EPPF ratios for a new object joining each block, then a new block."""
    sizes = np.asarray(sizes, dtype=np.float64)
    return np.append(sizes - cfg.discount, cfg.m + len(sizes) * cfg.discount)


def rand_index(t1: Partition, t2: Partition) -> float:
    n = t1.n
    if t2.n != n:
        raise ValueError("partitions have different sizes")
    if n < 2:
        return 1.0
    table = contingency(t1.labels, t2.labels)
    pairs = n * (n - 1) / 2.0
    same_both = (table * (table - 1)).sum() / 2.0
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    same1 = (a * (a - 1)).sum() / 2.0
    same2 = (b * (b - 1)).sum() / 2.0
    agree = pairs + 2.0 * same_both - same1 - same2
    return float(agree / pairs)


def contingency(l1, l2) -> np.ndarray:
    l1 = np.asarray(l1)
    l2 = np.asarray(l2)
    k1 = int(l1.max()) + 1
    k2 = int(l2.max()) + 1
    return np.bincount(l1 * k2 + l2, minlength=k1 * k2).reshape(k1, k2).astype(np.float64)


def partition_distance(t1: Partition, t2: Partition) -> float:
    """1 / RI - 1, infinite when the partitions disagree on every pair."""
    ri = rand_index(t1, t2)
    return math.inf if ri == 0 else 1.0 / ri - 1.0


@functools.lru_cache(maxsize=65536)
def _log_penalty(d: float, a: float, b: float) -> float:
    return special.gammaln(a) + log_tricomi_u(a, 1.0 - b, d) - special.betaln(a, b)


def log_penalty_C(d: float, cfg: AlphaPriorConfig) -> float:
    """log E_alpha[exp(-alpha / (1 - alpha) * d)] under alpha ~ Beta(a, b)."""
    if math.isnan(d) or d < 0:
        raise NonFiniteDistance(f"penalty distance must be >= 0, got {d!r}")
    if d == 0:
        return 0.0
    if math.isinf(d):
        return -math.inf
    return _log_penalty(float(d), cfg.a, cfg.b)


class AlphaPosterior:
    """Gridded inverse-CDF sampler for p(alpha | d) ∝ exp(-d alpha/(1-alpha)) Beta(alpha; a, b).

    The grid lives in s = logit(alpha) where the density (times the Jacobian)
    is smooth with exponentially decaying tails, so it is automatically dense
    near alpha = 0 and alpha = 1.
    """

    def __init__(self, d: float, cfg: AlphaPriorConfig, points: int = 2048):
        self.d = d
        a, b = cfg.a, cfg.b
        tail = 40.0
        lo = -tail / a
        hi = tail / b
        if d > 0:
            hi = min(hi, math.log(tail / d) + 2.0 if tail / d > 0 else hi)
            lo = min(lo, hi - 10.0)
        s = np.linspace(lo, hi, points)
        # t = e^s;  density in t is e^{-d t} t^{a-1} (1+t)^{-a-b};  dt = t ds
        logf = -d * np.exp(s) + a * s - (a + b) * np.logaddexp(0.0, s)
        f = np.exp(logf - logf.max())
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(s))])
        self.s = s
        self.cdf = cdf / cdf[-1]

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        s = np.interp(u, self.cdf, self.s)
        return special.expit(s)

    def mean(self) -> float:
        w = np.diff(self.cdf)
        mid = special.expit(0.5 * (self.s[1:] + self.s[:-1]))
        return float((w * mid).sum())


def sample_alpha_posterior(d: float, cfg: AlphaPriorConfig, rng, size=None):
    if math.isnan(d) or d < 0:
        raise NonFiniteDistance(f"penalty distance must be >= 0, got {d!r}")
    if math.isinf(d):
        return 0.0 if size is None else np.zeros(size)
    return AlphaPosterior(d, cfg).sample(rng, size)
