"""Two-layer Gaussian-mixture benchmark data and distance transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy import special

from .core import DistanceMatrix, validate_distance_matrix
from .numerics import gamma_quantile_array


class DegenerateDistances(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int = 100
    n_clusters: int = 10
    dim: int = 10
    sigma_s: float = 0.1
    alpha_s: float = 0.0
    dirichlet_m: float = 10.0
    # per-cluster Dirichlet parameter; None spreads dirichlet_m evenly
    dirichlet_alpha: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < self.n_clusters:
            raise ValueError("n must be at least n_clusters")
        if not self.sigma_s > 0:
            raise ValueError("sigma_s must be positive")
        if not 0 <= self.alpha_s <= 1:
            raise ValueError("alpha_s must lie in [0, 1]")
        if self.n_clusters > self.dim:
            raise ValueError("need dim >= n_clusters for simplex centres")


@dataclass(frozen=True, eq=False)
class SimOutput:
    x1: np.ndarray
    x2: np.ndarray
    z1_true: np.ndarray
    z2_true: np.ndarray
    d1: DistanceMatrix
    d2: DistanceMatrix


def centers_standard_simplex(k: int = 10, dim: int = 10) -> np.ndarray:
    if k > dim:
        raise ValueError("k must not exceed dim")
    return np.eye(dim)[:k]


def euclidean_distances(x: np.ndarray) -> DistanceMatrix:
    return validate_distance_matrix(squareform(pdist(x)))


def simulate_two_layer(cfg: SimConfig) -> SimOutput:
    rng = np.random.default_rng(cfg.seed)
    k, n = cfg.n_clusters, cfg.n
    conc = cfg.dirichlet_alpha if cfg.dirichlet_alpha is not None else cfg.dirichlet_m / k
    weights = rng.dirichlet(np.full(k, conc))
    z1 = rng.choice(k, size=n, p=weights)
    centers = centers_standard_simplex(k, cfg.dim)

    n_copy = int(np.floor(n * cfg.alpha_s + 1e-9))
    copied = rng.choice(n, size=n_copy, replace=False)
    rest = np.setdiff1d(np.arange(n), copied)
    z2 = z1.copy()
    z2[rest] = rng.permutation(z1[rest])

    x1 = centers[z1] + cfg.sigma_s * rng.standard_normal((n, cfg.dim))
    x2 = centers[z2] + cfg.sigma_s * rng.standard_normal((n, cfg.dim))
    return SimOutput(x1, x2, z1, z2, euclidean_distances(x1), euclidean_distances(x2))


def gamma_quantile_transform(d: DistanceMatrix, shape: float = 3.0, rate: float = 5.0) -> DistanceMatrix:
    """Standardise off-diagonal distances, push through Phi, then the Gamma quantile."""
    n = d.n
    off = ~np.eye(n, dtype=bool)
    vals = d.values[off]
    sd = vals.std()
    if not sd > 0:
        raise DegenerateDistances("off-diagonal distances have zero spread")
    z = (d.values - vals.mean()) / sd
    # lower and upper tail probabilities kept separately to avoid rounding to 1
    out = gamma_quantile_array(special.ndtr(z), shape, rate, upper=special.ndtr(-z))
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 0.0)
    return validate_distance_matrix(out)
