"""Empirical-Bayes choice of likelihood hyperparameters from a distance matrix.

The recipe: pick K by the elbow of the PAM cost curve, run PAM at that K, and
match Gamma moments to the member-to-medoid distances (``a``) and to the
distances between medoids (``b``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DistanceMatrix
from .kmedoids import PamResult, elbow_k, pam
from .likelihood import LikelihoodConfig, Mode

DELTA1_CAP = 1.0 - 1e-6
DELTA2_FLOOR = 1.0 + 1e-6
VARIANCE_FLOOR = 1e-12


class DegenerateDistances(ValueError):
    pass


@dataclass(frozen=True)
class HyperSelection:
    cfg: LikelihoodConfig
    k_elbow: int
    a_set_size: int
    b_set_size: int
    diagnostics: dict = field(default_factory=dict)
    pam: PamResult | None = None


def default_k_range(n: int) -> tuple[int, int]:
    return 2, max(2, min(30, n // 2))


def moment_estimates(a, b) -> dict:
    """Method-of-moments Gamma fits for the two distance sets (unbiased S^2)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise DegenerateDistances("need at least two distances in each set")
    a_mean, a_var = a.mean(), a.var(ddof=1)
    b_mean, b_var = b.mean(), b.var(ddof=1)
    if a_var < VARIANCE_FLOOR or b_var < VARIANCE_FLOOR:
        raise DegenerateDistances("zero variance in the member or medoid distances")
    delta1_raw = a_mean**2 / a_var
    delta2_raw = b_mean**2 / b_var
    delta1 = min(delta1_raw, DELTA1_CAP)
    delta2 = max(delta2_raw, DELTA2_FLOOR)
    return {
        "a_mean": a_mean, "a_var": a_var, "b_mean": b_mean, "b_var": b_var,
        "delta1_raw": delta1_raw, "delta2_raw": delta2_raw,
        "delta1": delta1, "mu": delta1 * len(a), "beta": a.sum(),
        "delta2": delta2, "theta_rate": b_mean / b_var,
        "zeta": delta2 * len(b), "gamma_rate": b.sum(),
    }


def select_hyperparameters(
    d: DistanceMatrix,
    k_range: tuple[int, int] | None = None,
    mode: Mode | str = Mode.LINEAR,
    repulsion: bool = True,
) -> HyperSelection:
    if d.n < 4:
        raise DegenerateDistances("hyperparameter selection needs N >= 4")
    k_range = k_range or default_k_range(d.n)
    k = elbow_k(d, k_range)
    fit = pam(d, k)
    med = fit.medoids.as_array()
    labels = fit.labels.labels
    members = np.setdiff1d(np.arange(d.n), med)
    a = d.values[med[labels[members]], members]
    iu = np.triu_indices(len(med), 1)
    b = d.values[np.ix_(med, med)][iu]
    est = moment_estimates(a, b)
    cfg = LikelihoodConfig(
        delta1=est["delta1"], delta2=est["delta2"], mu=est["mu"], beta=est["beta"],
        zeta=est["zeta"], gamma_rate=est["gamma_rate"], theta_rate=est["theta_rate"],
        mode=Mode(mode), repulsion=repulsion,
    )
    return HyperSelection(cfg, k, len(a), len(b), est, fit)


def singleton_prefilter(d: DistanceMatrix, q: float = 0.01, threshold: float = 0.15):
    """Split objects into (kept, singletons) by the q-quantile of each row.

    Returns the kept indices, the singleton indices and the distance matrix
    restricted to the kept objects.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    n = d.n
    off = ~np.eye(n, dtype=bool)
    rows = d.values[off].reshape(n, n - 1) if n > 1 else np.zeros((n, 0))
    quant = np.quantile(rows, q, axis=1) if n > 1 else np.zeros(n)
    single = quant > threshold
    kept = np.flatnonzero(~single)
    return kept, np.flatnonzero(single), d.subset(kept)
