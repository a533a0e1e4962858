"""Exact posteriors by enumeration, for small N.

These are brute-force references: every medoid set (or set partition) is
scored directly with the plain likelihood and prior functions.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.special import logsumexp

from .core import DistanceMatrix, MedoidSet, MultiViewData, induce_partition
from .likelihood import LikelihoodConfig, loglik
from .priors import (
    AlphaPriorConfig,
    MedoidPriorConfig,
    log_medoid_prior,
    log_penalty_C,
    partition_distance,
)


def all_medoid_sets(n: int):
    """Every non-empty subset of range(n), as sorted tuples."""
    for k in range(1, n + 1):
        yield from itertools.combinations(range(n), k)


def set_partitions(n: int):
    """All set partitions of range(n) as canonical label tuples (restricted growth)."""
    if n == 0:
        yield ()
        return

    def grow(prefix, k):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(k + 1):
            prefix.append(c)
            yield from grow(prefix, max(k, c + 1))
            prefix.pop()

    yield from grow([0], 1)


def _normalise(keys, logp) -> dict:
    logp = np.asarray(logp)
    p = np.exp(logp - logsumexp(logp))
    return dict(zip(keys, p))


def exact_medoid_posterior(
    d: DistanceMatrix,
    cfg: LikelihoodConfig,
    prior: MedoidPriorConfig,
    flat_likelihood: bool = False,
) -> dict:
    keys = list(all_medoid_sets(d.n))
    logp = [
        (0.0 if flat_likelihood else loglik(d, MedoidSet(g), cfg))
        + log_medoid_prior(MedoidSet(g), prior)
        for g in keys
    ]
    return _normalise(keys, logp)


def exact_joint_posterior(
    mv: MultiViewData,
    cfg1: LikelihoodConfig,
    cfg2: LikelihoodConfig,
    priors: tuple[MedoidPriorConfig, MedoidPriorConfig],
    alpha_prior: AlphaPriorConfig,
) -> dict:
    """Posterior over (gamma1, gamma2) with the agreement penalty marginalised."""
    sets = list(all_medoid_sets(mv.n))
    side = []
    for d, cfg, prior in ((mv.d1, cfg1, priors[0]), (mv.d2, cfg2, priors[1])):
        side.append([
            (loglik(d, MedoidSet(g), cfg) + log_medoid_prior(MedoidSet(g), prior),
             induce_partition(d, MedoidSet(g)))
            for g in sets
        ])
    keys, logp = [], []
    for (g1, (s1, t1)), (g2, (s2, t2)) in itertools.product(
        zip(sets, side[0]), zip(sets, side[1])
    ):
        keys.append((g1, g2))
        logp.append(s1 + s2 + log_penalty_C(partition_distance(t1, t2), alpha_prior))
    return _normalise(keys, logp)


def empirical_distribution(items) -> dict:
    out: dict = {}
    for it in items:
        out[it] = out.get(it, 0) + 1
    total = sum(out.values())
    return {k: v / total for k, v in out.items()}


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
