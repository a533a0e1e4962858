"""Marginal log-likelihoods of a distance matrix given a partition.

Two forms are supported:

* quadratic: Gamma(delta1, lambda_k) on every within-cluster pair and, with
  repulsion, Gamma(delta2, theta_kt) on every between-cluster pair; lambda and
  theta integrated out against Gamma(mu, beta) and Gamma(zeta, gamma_rate).
* linear: Gamma(delta1, lambda_i) on medoid-to-member distances only (lambda
  integrated out) and, with repulsion, Gamma(delta2, theta_rate) on the
  distances between medoids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import special

from .core import DistanceMatrix, MedoidSet, Partition, induce_partition


class Mode(str, Enum):
    QUADRATIC = "quadratic"
    LINEAR = "linear"


class InvalidConfig(ValueError):
    pass


class InconsistentPartition(ValueError):
    pass


@dataclass(frozen=True)
class LikelihoodConfig:
    delta1: float = 0.5
    delta2: float = 2.0
    mu: float = 2.0
    beta: float = 2.0
    zeta: float = 2.0
    gamma_rate: float = 2.0
    theta_rate: float = 1.0
    mode: Mode = Mode.QUADRATIC
    repulsion: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0 < self.delta1 < 1:
            raise InvalidConfig(f"delta1 must lie in (0, 1), got {self.delta1}")
        if not self.delta2 > 1:
            raise InvalidConfig(f"delta2 must exceed 1, got {self.delta2}")
        for name in ("mu", "beta", "zeta", "gamma_rate", "theta_rate"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidConfig(f"{name} must be positive and finite, got {v}")

    def with_(self, **kw) -> "LikelihoodConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["mode"] = self.mode.value
        return d


def gamma_gamma_marginal(n, sum_log, total, shape, prior_shape, prior_rate):
    """log of  int prod_i Gamma(x_i; shape, lam) Gamma(lam; prior_shape, prior_rate) dlam.

    ``n``, ``sum_log`` and ``total`` are the count, sum of logs and sum of the
    observations; all may be arrays.  ``n == 0`` gives exactly 0.
    """
    n = np.asarray(n, dtype=np.float64)
    out = (
        -n * special.gammaln(shape)
        + special.gammaln(prior_shape + n * shape)
        - special.gammaln(prior_shape)
        + prior_shape * math.log(prior_rate)
        + (shape - 1.0) * sum_log
        - (prior_shape + shape * n) * np.log(prior_rate + total)
    )
    return np.where(n > 0, out, 0.0)


def _block_sums(d: DistanceMatrix, labels: np.ndarray, k: int):
    """K x K sums of D and log D over label blocks (diagonal blocks double count)."""
    idx = (labels[:, None] * k + labels[None, :]).ravel()
    s = np.bincount(idx, weights=d.clamped.ravel(), minlength=k * k).reshape(k, k)
    sl = np.bincount(idx, weights=d.log_values.ravel(), minlength=k * k).reshape(k, k)
    return s, sl


def loglik_quadratic(d: DistanceMatrix, t: Partition, cfg: LikelihoodConfig) -> float:
    if cfg.mode is not Mode.QUADRATIC:
        raise InvalidConfig("loglik_quadratic needs a quadratic-mode config")
    if t.n != d.n:
        raise InconsistentPartition("partition and matrix sizes differ")
    k = t.k
    sizes = np.bincount(t.labels, minlength=k).astype(np.float64)
    if cfg.repulsion:
        s, sl = _block_sums(d, t.labels, k)
        within_s, within_sl = np.diag(s) / 2.0, np.diag(sl) / 2.0
    else:
        within_s, within_sl = _within_sums(d, t.labels, k)
    pairs = sizes * (sizes - 1.0) / 2.0
    total = gamma_gamma_marginal(pairs, within_sl, within_s, cfg.delta1, cfg.mu, cfg.beta).sum()
    if cfg.repulsion and k > 1:
        iu = np.triu_indices(k, 1)
        m = np.outer(sizes, sizes)[iu]
        total += gamma_gamma_marginal(
            m, sl[iu], s[iu], cfg.delta2, cfg.zeta, cfg.gamma_rate
        ).sum()
    return float(total)


def _within_sums(d: DistanceMatrix, labels: np.ndarray, k: int):
    s = np.zeros(k)
    sl = np.zeros(k)
    order = np.argsort(labels, kind="stable")
    bounds = np.cumsum(np.bincount(labels, minlength=k))[:-1]
    for c, members in enumerate(np.split(order, bounds)):
        if len(members) > 1:
            ix = np.ix_(members, members)
            s[c] = d.clamped[ix].sum() / 2.0
            sl[c] = d.log_values[ix].sum() / 2.0
    return s, sl


def loglik_linear(
    d: DistanceMatrix, gamma: MedoidSet, t: Partition, cfg: LikelihoodConfig
) -> float:
    """Medoid-to-member cohesion plus (optionally) medoid-pair repulsion.

    ``t`` must be rooted at ``gamma``: medoid ``gamma[c]`` carries label ``c``.
    Nested layer-2 partitions satisfy this too, so they are accepted.
    """
    if cfg.mode is not Mode.LINEAR:
        raise InvalidConfig("loglik_linear needs a linear-mode config")
    med = gamma.as_array()
    if t.n != d.n or t.k != len(med) or np.any(t.labels[med] != np.arange(len(med))):
        raise InconsistentPartition("partition is not rooted at the given medoids")
    return _linear_from_labels(d, med, t.labels, cfg)


def _linear_from_labels(d: DistanceMatrix, med: np.ndarray, labels: np.ndarray, cfg) -> float:
    k = len(med)
    cols = np.arange(d.n)
    to_medoid = med[labels]
    dist = d.clamped[to_medoid, cols]
    logd = d.log_values[to_medoid, cols]
    counts = np.bincount(labels, minlength=k) - 1.0
    s = np.bincount(labels, weights=dist, minlength=k)
    sl = np.bincount(labels, weights=logd, minlength=k)
    total = gamma_gamma_marginal(counts, sl, s, cfg.delta1, cfg.mu, cfg.beta).sum()
    if cfg.repulsion and k > 1:
        iu = np.triu_indices(k, 1)
        between = d.clamped[np.ix_(med, med)][iu]
        lb = d.log_values[np.ix_(med, med)][iu]
        total += (
            len(between) * (cfg.delta2 * math.log(cfg.theta_rate) - special.gammaln(cfg.delta2))
            + (cfg.delta2 - 1.0) * lb.sum()
            - cfg.theta_rate * between.sum()
        )
    return float(total)


def loglik(d: DistanceMatrix, gamma: MedoidSet, cfg: LikelihoodConfig) -> float:
    t = induce_partition(d, gamma)
    if cfg.mode is Mode.LINEAR:
        return loglik_linear(d, gamma, t, cfg)
    return loglik_quadratic(d, t, cfg)


def loglik_rooted(d, med: np.ndarray, labels: np.ndarray, cfg: LikelihoodConfig) -> float:
    """Dispatch on an already-induced (possibly nested) labelling."""
    if cfg.mode is Mode.LINEAR:
        return _linear_from_labels(d, med, labels, cfg)
    return loglik_quadratic(d, Partition(labels, len(med)), cfg)


class ClusterStats:
    """Incremental sufficient statistics for the quadratic likelihood.

    Supports removing one object and scoring every placement for it (each
    existing cluster or a new singleton) in O(N + K^2).  The pure recompute in
    ``loglik_quadratic`` is the reference; this is the fast path used by the
    label Gibbs samplers.
    """

    def __init__(self, d: DistanceMatrix, labels, cfg: LikelihoodConfig):
        if cfg.mode is not Mode.QUADRATIC:
            raise InvalidConfig("ClusterStats tracks the quadratic likelihood")
        self.d = d
        self.cfg = cfg
        lab = Partition.from_labels(labels).labels
        self.labels = np.array(lab, dtype=np.intp)
        self.k = int(self.labels.max()) + 1
        self.sizes = np.bincount(self.labels, minlength=self.k).astype(np.float64)
        self.s, self.sl = _block_sums(d, self.labels, self.k)

    # pair-block marginals, vectorised
    def _within(self, n, s, sl):
        c = self.cfg
        return gamma_gamma_marginal(n * (n - 1.0) / 2.0, sl / 2.0, s / 2.0, c.delta1, c.mu, c.beta)

    def _between(self, m, s, sl):
        c = self.cfg
        return gamma_gamma_marginal(m, sl, s, c.delta2, c.zeta, c.gamma_rate)

    def loglik(self) -> float:
        total = self._within(self.sizes, np.diag(self.s), np.diag(self.sl)).sum()
        if self.cfg.repulsion and self.k > 1:
            iu = np.triu_indices(self.k, 1)
            m = np.outer(self.sizes, self.sizes)[iu]
            total += self._between(m, self.s[iu], self.sl[iu]).sum()
        return float(total)

    def _row(self, j):
        lab = self.labels
        mask = lab >= 0
        mask[j] = False
        r = np.bincount(lab[mask], weights=self.d.clamped[j, mask], minlength=self.k)
        rl = np.bincount(lab[mask], weights=self.d.log_values[j, mask], minlength=self.k)
        return r, rl

    def remove(self, j: int) -> None:
        """Take object ``j`` out; an emptied cluster is dropped and ids compacted."""
        c = self.labels[j]
        r, rl = self._row(j)
        self.s[c, :] -= r
        self.s[:, c] -= r
        self.sl[c, :] -= rl
        self.sl[:, c] -= rl
        self.sizes[c] -= 1
        self.labels[j] = -1
        if self.sizes[c] == 0:
            self._drop(c)

    def _drop(self, c: int) -> None:
        keep = np.arange(self.k) != c
        self.s = self.s[np.ix_(keep, keep)]
        self.sl = self.sl[np.ix_(keep, keep)]
        self.sizes = self.sizes[keep]
        self.labels[self.labels > c] -= 1
        self.k -= 1

    def placement_deltas(self, j: int) -> np.ndarray:
        """Change in log-likelihood for putting removed object ``j`` in each
        cluster ``0..k-1`` and, last, in a new singleton cluster."""
        r, rl = self._row(j)
        n = self.sizes
        ds = np.diag(self.s)
        dsl = np.diag(self.sl)
        out = np.empty(self.k + 1)
        out[:-1] = self._within(n + 1.0, ds + 2.0 * r, dsl + 2.0 * rl) - self._within(n, ds, dsl)
        out[-1] = 0.0
        if self.cfg.repulsion and self.k > 0:
            # joining c changes block (c, t) for every t != c
            mm = np.outer(n, n)
            old = self._between(mm, self.s, self.sl)
            new = self._between(
                np.outer(n + 1.0, n), self.s + r[None, :], self.sl + rl[None, :]
            )
            diff = new - old
            np.fill_diagonal(diff, 0.0)
            out[:-1] += diff.sum(axis=1)
            out[-1] += self._between(n, r, rl).sum()
        return out

    def add(self, j: int, c: int) -> None:
        """Insert removed object ``j`` into cluster ``c`` (``c == k`` opens one)."""
        if c == self.k:
            self.s = np.pad(self.s, ((0, 1), (0, 1)))
            self.sl = np.pad(self.sl, ((0, 1), (0, 1)))
            self.sizes = np.append(self.sizes, 0.0)
            self.k += 1
        r, rl = self._row(j)
        self.s[c, :] += r
        self.s[:, c] += r
        self.sl[c, :] += rl
        self.sl[:, c] += rl
        self.sizes[c] += 1
        self.labels[j] = c


class FlatStats:
    """Stand-in for ClusterStats with a constant likelihood (prior-only runs)."""

    def __init__(self, labels):
        self.labels = np.array(Partition.from_labels(labels).labels, dtype=np.intp)
        self.k = int(self.labels.max()) + 1
        self.sizes = np.bincount(self.labels, minlength=self.k).astype(np.float64)

    def loglik(self) -> float:
        return 0.0

    def remove(self, j):
        c = self.labels[j]
        self.sizes[c] -= 1
        self.labels[j] = -1
        if self.sizes[c] == 0:
            self.sizes = np.delete(self.sizes, c)
            self.labels[self.labels > c] -= 1
            self.k -= 1

    def placement_deltas(self, j):
        return np.zeros(self.k + 1)

    def add(self, j, c):
        if c == self.k:
            self.sizes = np.append(self.sizes, 0.0)
            self.k += 1
        self.sizes[c] += 1
        self.labels[j] = c
