"""Partitioning Around Medoids (BUILD + SWAP) and helpers built on it."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import DistanceMatrix, MedoidSet, Partition, induce_partition


class DegenerateRange(ValueError):
    pass


@dataclass(frozen=True)
class PamResult:
    medoids: MedoidSet
    labels: Partition
    cost: float
    iterations: int


def medoid_cost(d: DistanceMatrix, medoids) -> float:
    """Sum over objects of the distance to the nearest medoid."""
    med = np.asarray(list(medoids), dtype=np.intp)
    return float(d.values[med].min(axis=0).sum())


def _build(D: np.ndarray, k: int) -> list[int]:
    n = D.shape[0]
    first = int(np.argmin(D.sum(axis=0)))
    medoids = [first]
    nearest = D[first].copy()
    for _ in range(1, k):
        # gain of adding candidate c: sum_j max(nearest_j - D[c, j], 0)
        gain = np.maximum(nearest[None, :] - D, 0.0).sum(axis=1)
        gain[medoids] = -np.inf
        c = int(np.argmax(gain))
        medoids.append(c)
        nearest = np.minimum(nearest, D[c])
    return medoids


def pam(d: DistanceMatrix, k: int, max_iter: int = 1000) -> PamResult:
    """Greedy BUILD, then best-improvement SWAP until no swap lowers the cost."""
    n = d.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    D = d.values
    medoids = _build(D, k)
    cost = medoid_cost(d, medoids)
    iterations = 0
    while iterations < max_iter and k < n:
        med = np.asarray(medoids)
        sub = D[med]
        order = np.argsort(sub, axis=0, kind="stable")
        near_pos = order[0]
        dnear = sub[near_pos, np.arange(n)]
        dsecond = sub[order[1], np.arange(n)] if k > 1 else np.full(n, np.inf)
        # distance to nearest remaining medoid if medoid m is removed: K x N
        without = np.where(near_pos[None, :] == np.arange(k)[:, None], dsecond[None, :], dnear[None, :])
        cand = np.setdiff1d(np.arange(n), med)
        # new cost for swapping medoid m with candidate o: K x C, in chunks
        step = max(1, 4_000_000 // (k * n))
        new_cost = np.concatenate([
            np.minimum(without[:, None, :], D[cand[i:i + step]][None, :, :]).sum(axis=2)
            for i in range(0, len(cand), step)
        ], axis=1)
        m_idx, o_idx = np.unravel_index(np.argmin(new_cost), new_cost.shape)
        best = new_cost[m_idx, o_idx]
        if best >= cost - 1e-12 * max(1.0, abs(cost)):
            break
        medoids[m_idx] = int(cand[o_idx])
        cost = medoid_cost(d, medoids)
        iterations += 1
    ms = MedoidSet(tuple(medoids))
    return PamResult(ms, induce_partition(d, ms), medoid_cost(d, ms), iterations)


def knee_index(ks, costs) -> int:
    """Position of the point farthest from the chord joining the curve ends.

    Both axes are rescaled to [0, 1]; on a flat curve the first point wins.
    """
    x = np.asarray(ks, dtype=np.float64)
    y = np.asarray(costs, dtype=np.float64)
    if len(x) < 3:
        return 0
    xs = (x - x[0]) / (x[-1] - x[0])
    span = y.max() - y.min()
    if span <= 0:
        return 0
    ys = (y - y.min()) / span
    p0 = np.array([xs[0], ys[0]])
    v = np.array([xs[-1], ys[-1]]) - p0
    dist = np.abs(v[0] * (ys - p0[1]) - v[1] * (xs - p0[0])) / np.hypot(*v)
    return int(np.argmax(dist))


def within_sum_of_squares(d: DistanceMatrix, fit: PamResult) -> float:
    """Sum of squared member-to-medoid distances of a PAM fit."""
    med = fit.medoids.as_array()
    return float((d.values[med[fit.labels.labels], np.arange(d.n)] ** 2).sum())


def elbow_k(d: DistanceMatrix, k_range: tuple[int, int], return_curve: bool = False):
    """Knee of the log within-cluster sum of squares over ``k_range``.

    Each K is fitted by PAM; the curve is the log of its squared
    member-to-medoid distances, so the knee is where relative improvement
    levels off.
    """
    lo, hi = k_range
    if not 1 <= lo <= hi <= d.n:
        raise DegenerateRange(f"k range {k_range} not inside 1..{d.n}")
    ks = list(range(lo, hi + 1))
    wss = np.array([within_sum_of_squares(d, pam(d, k)) for k in ks])
    floor = 1e-12 * wss.max() if wss.max() > 0 else 1.0
    curve = np.log(np.maximum(wss, floor))
    k = ks[knee_index(ks, curve)]
    return (k, ks, wss.tolist()) if return_curve else k


def exhaustive_kmedoids(d: DistanceMatrix, k: int):
    """All size-k medoid sets achieving the minimum cost, with that cost."""
    best, arg = np.inf, []
    for combo in itertools.combinations(range(d.n), k):
        c = medoid_cost(d, combo)
        if c < best - 1e-12:
            best, arg = c, [combo]
        elif abs(c - best) <= 1e-12:
            arg.append(combo)
    return arg, best


def map_equivalence_check(d: DistanceMatrix, k: int) -> bool:
    """Compare the mode of exp(-sum of medoid-to-member distances) over all
    size-k medoid sets with the exhaustive K-medoids optimum.

    The posterior side scores each set through its induced partition; the
    optimisation side uses the nearest-medoid cost directly.  Ties on either
    side are accepted as long as the two optimal sets overlap.
    """
    if d.n > 10:
        raise ValueError("exhaustive check is limited to N <= 10")
    best, modes = -np.inf, []
    cols = np.arange(d.n)
    for combo in itertools.combinations(range(d.n), k):
        ms = MedoidSet(combo)
        t = induce_partition(d, ms)
        logpost = -float(d.values[ms.as_array()[t.labels], cols].sum())
        if logpost > best + 1e-12:
            best, modes = logpost, [combo]
        elif abs(logpost - best) <= 1e-12:
            modes.append(combo)
    optima, _ = exhaustive_kmedoids(d, k)
    return bool(set(modes) & set(optima))
