"""Summaries of posterior partition draws and partition comparison metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .core import Partition
from .priors import contingency, rand_index  # noqa: F401  (re-exported)
from .trace import TraceSet


class EmptyTrace(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoClusteringMatrix:
    s: np.ndarray

    @property
    def n(self) -> int:
        return self.s.shape[0]


def _draws(trace, layer: int) -> np.ndarray:
    lab = trace.layer(layer) if isinstance(trace, TraceSet) else np.asarray(trace)
    if lab.ndim != 2 or lab.shape[0] == 0:
        raise EmptyTrace("trace has no retained draws")
    return lab


def coclustering(trace, layer: int = 0) -> CoClusteringMatrix:
    """Fraction of draws in which each pair of objects shares a cluster."""
    lab = _draws(trace, layer)
    n_draws, n = lab.shape
    k = int(lab.max()) + 1
    acc = np.zeros((n, n))
    step = max(1, 2_000_000 // (n * k))
    for a in range(0, n_draws, step):
        block = lab[a:a + step]
        # one-hot indicators of (draw, cluster) for every object; their Gram
        # matrix counts the draws in which two objects share a cluster
        onehot = np.zeros((n, len(block) * k))
        onehot[np.arange(n)[None, :], np.arange(len(block))[:, None] * k + block] = 1.0
        acc += onehot @ onehot.T
    s = acc / n_draws
    s = 0.5 * (s + s.T)
    np.fill_diagonal(s, 1.0)
    return CoClusteringMatrix(s)


def _labels(t):
    return t.labels if isinstance(t, Partition) else np.asarray(t)


def adjusted_rand(t1, t2) -> float:
    table = contingency(_labels(t1), _labels(t2))
    n = table.sum()
    sum_cells = comb(table, 2).sum()
    sum_a = comb(table.sum(axis=1), 2).sum()
    sum_b = comb(table.sum(axis=0), 2).sum()
    total = comb(n, 2)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        # both partitions trivial in the same way: identical up to labels
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


def _entropy(counts) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def variation_of_information(t1, t2) -> float:
    """H(t1) + H(t2) - 2 I(t1; t2) in nats."""
    table = contingency(_labels(t1), _labels(t2))
    h1 = _entropy(table.sum(axis=1))
    h2 = _entropy(table.sum(axis=0))
    h12 = _entropy(table.ravel())
    return max(0.0, 2.0 * h12 - h1 - h2)


def _xlogx(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c, dtype=np.float64)
    pos = c > 0
    out[pos] = c[pos] * np.log(c[pos])
    return out


def expected_vi(candidate: np.ndarray, draws: np.ndarray, weights=None) -> float:
    """Mean VI between ``candidate`` and each row of ``draws``."""
    draws = np.atleast_2d(draws)
    u, n = draws.shape
    kc = int(candidate.max()) + 1
    kd = int(draws.max()) + 1
    # one contingency table per draw, stacked
    codes = (np.arange(u)[:, None] * kc + candidate[None, :]) * kd + draws
    joint = np.bincount(codes.ravel(), minlength=u * kc * kd).reshape(u, kc * kd)
    drow = np.bincount((np.arange(u)[:, None] * kd + draws).ravel(), minlength=u * kd)
    h_joint = np.log(n) - _xlogx(joint).sum(axis=1) / n
    h_draws = np.log(n) - _xlogx(drow.reshape(u, kd)).sum(axis=1) / n
    h_cand = _entropy(np.bincount(candidate).astype(float))
    vi = 2.0 * h_joint - h_cand - h_draws
    return float(np.average(vi, weights=weights))


def vi_lower_bound(candidates: np.ndarray, s: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Co-clustering lower bound on the expected VI, up to a shared constant.

    sum_i [log |c(i)| - 2 log sum_{j in c(i)} s_ij] / N, evaluated for each row.
    """
    n = candidates.shape[1]
    out = np.empty(len(candidates))
    for a in range(0, len(candidates), chunk):
        c = candidates[a:a + chunk]
        same = c[:, :, None] == c[:, None, :]
        sizes = same.sum(axis=2)
        mass = (same * s[None, :, :]).sum(axis=2)
        out[a:a + chunk] = (np.log(sizes) - 2.0 * np.log(mass)).sum(axis=1) / n
    return out


def point_estimate(trace, layer: int = 0, max_candidates: int | None = 200) -> Partition:
    """Retained draw with the smallest mean VI to all draws.

    The search runs over distinct draws (weighted by frequency); ties go to the
    draw that appears first in the trace.  When there are more than
    ``max_candidates`` distinct draws, only those ranked best by the
    co-clustering VI lower bound get the exact mean-VI evaluation.
    """
    lab = _draws(trace, layer)
    canon = np.array([Partition.from_labels(row).labels for row in lab])
    uniq, first, counts = np.unique(canon, axis=0, return_index=True, return_counts=True)
    order = np.argsort(first)
    uniq, counts = uniq[order], counts[order]
    cand = np.arange(len(uniq))
    if max_candidates is not None and len(uniq) > max_candidates:
        lb = vi_lower_bound(uniq, coclustering(lab).s)
        cand = np.sort(np.argsort(lb, kind="stable")[:max_candidates])
    scores = np.array([expected_vi(uniq[c], uniq, counts) for c in cand])
    best = int(cand[np.flatnonzero(scores <= scores.min() + 1e-12)[0]])
    return Partition.from_labels(uniq[best])


@dataclass(frozen=True)
class KPosterior:
    values: np.ndarray
    pmf: np.ndarray
    mean: float
    sd: float

    def as_dict(self) -> dict:
        return {
            "k": self.values.tolist(), "pmf": self.pmf.tolist(),
            "mean": self.mean, "sd": self.sd,
        }


def k_posterior(trace, layer: int = 0) -> KPosterior:
    lab = _draws(trace, layer)
    ks = np.array([len(np.unique(row)) for row in lab])
    vals, counts = np.unique(ks, return_counts=True)
    sd = float(ks.std(ddof=1)) if len(ks) > 1 else 0.0
    return KPosterior(vals, counts / counts.sum(), float(ks.mean()), sd)


def write_coclustering_csv(path, cc: CoClusteringMatrix) -> None:
    np.savetxt(path, cc.s, delimiter=",", fmt="%.6f")


def write_coclustering_pgm(path, cc: CoClusteringMatrix) -> None:
    """Binary 8-bit PGM; co-clustered pairs are dark."""
    pix = np.round(255 * (1.0 - cc.s)).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cc.n} {cc.n}\n255\n".encode())
        fh.write(pix.tobytes())
