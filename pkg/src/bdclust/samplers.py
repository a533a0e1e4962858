"""MCMC kernels over medoid sets and over partition labels.

Tessellation samplers move on medoid sets with birth, death and move
proposals (or single-site indicator Gibbs updates); the induced partition is
recomputed for every proposal.  The Pitman-Yor samplers update labels
directly.  Every sampler owns its Generator, so the same seed, data and
config reproduce the same trace bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    DistanceMatrix,
    MedoidSet,
    MultiViewData,
    Partition,
    nearest_medoid_labels,
    nested_labels,
    repair_indices,
)
from .hyper import default_k_range
from .kmedoids import elbow_k, pam
from .likelihood import ClusterStats, FlatStats, LikelihoodConfig, loglik_rooted
from .priors import (
    AlphaPosterior,
    AlphaPriorConfig,
    MedoidPriorConfig,
    PYConfig,
    log_medoid_prior_k,
    log_penalty_C,
    log_py_eppf,
    partition_distance,
    py_predictive_weights,
)
from .trace import TraceSet

# Bound on the number of memoised medoid-set scores kept per chain.
CACHE_LIMIT = 200_000


# --- chain configuration ----------------------------------------------------


@dataclass(frozen=True)
class RandomInit:
    k: int


@dataclass(frozen=True)
class PamInit:
    # None picks K at the elbow of the PAM cost curve
    k: int | None = None


@dataclass(frozen=True)
class ExplicitInit:
    medoids: MedoidSet
    medoids2: MedoidSet | None = None


@dataclass(frozen=True)
class ChainConfig:
    iterations: int
    burn_in: int = 0
    thin: int = 1
    seed: int | np.random.SeedSequence = 0
    init: RandomInit | PamInit | ExplicitInit = field(default_factory=PamInit)

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must lie in [0, iterations)")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def keep(self, t: int) -> bool:
        """Whether iteration ``t`` (1-based) is retained."""
        return t > self.burn_in and (t - self.burn_in) % self.thin == 0

    @property
    def n_kept(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class PYState:
    z1: np.ndarray
    z2: np.ndarray
    kappa: np.ndarray
    alpha: float

    def compatible(self) -> bool:
        """Objects with kappa = 1 are grouped identically in both layers."""
        r = np.flatnonzero(self.kappa)
        if len(r) == 0:
            return True
        a = Partition.from_labels(self.z1[r])
        b = Partition.from_labels(self.z2[r])
        return a.same_as(b)


class _Recorder:
    def __init__(self, chain: ChainConfig, n: int, layers: int, medoids: bool, alpha: bool):
        self.chain = chain
        m = chain.n_kept
        self.labels = [np.empty((m, n), dtype=np.intp) for _ in range(layers)]
        self.medoids: list[list] = [[] for _ in range(layers)]
        self.has_medoids = medoids
        self.log_post = np.empty(m)
        self.iterations = np.empty(m, dtype=np.int64)
        self.alpha = np.empty(m) if alpha else None
        self.accept: dict[str, list[int]] = {}
        self.r = 0

    def tally(self, kind: str, accepted: bool) -> None:
        acc = self.accept.setdefault(kind, [0, 0])
        acc[1] += 1
        acc[0] += int(accepted)

    def record(self, t, labels, medoids, log_post, alpha=None) -> None:
        r = self.r
        for l, lab in enumerate(labels):
            self.labels[l][r] = lab
        if self.has_medoids:
            for l, med in enumerate(medoids):
                self.medoids[l].append(tuple(med))
        self.log_post[r] = log_post
        self.iterations[r] = t
        if self.alpha is not None:
            self.alpha[r] = alpha
        self.r += 1

    def finish(self) -> TraceSet:
        return TraceSet(
            labels=self.labels,
            medoids=self.medoids,
            log_post=self.log_post,
            iterations=self.iterations,
            alpha=self.alpha,
            accept={k: tuple(v) for k, v in self.accept.items()},
        )


# --- proposals --------------------------------------------------------------


@dataclass(frozen=True)
class Proposal:
    kind: str
    medoids: tuple[int, ...]
    log_hastings: float


def propose_medoids(current, pool, kind: str, u1: float, u2: float) -> Proposal | None:
    """Birth, death or move on the part of ``current`` lying in ``pool``.

    ``pool`` is the sorted universe proposals may touch (all objects, or one
    layer-1 cluster for restricted updates).  Returns None when the move is
    impossible: death with one medoid left in the pool, birth or move with the
    pool exhausted.  The Hastings term is the reverse/forward proposal ratio.
    """
    cur = set(current)
    inside = [i for i in pool if i in cur]
    outside = [i for i in pool if i not in cur]
    n, k = len(pool), len(inside)
    if kind == "move":
        if k == 0 or k == n:
            return None
        out_i = inside[int(u1 * k)]
        in_i = outside[int(u2 * (n - k))]
        new = tuple(sorted((cur - {out_i}) | {in_i}))
        return Proposal(kind, new, 0.0)
    if kind == "birth":
        if k == n:
            return None
        in_i = outside[int(u1 * (n - k))]
        return Proposal(kind, tuple(sorted(cur | {in_i})), math.log((n - k) / (k + 1)))
    if kind == "death":
        if k <= 1:
            return None
        out_i = inside[int(u1 * k)]
        return Proposal(kind, tuple(sorted(cur - {out_i})), math.log(k / (n - k + 1)))
    raise ValueError(f"unknown proposal kind {kind!r}")


def _kind(t: int, u: float) -> str:
    if t % 2 == 0:
        return "move"
    return "birth" if u < 0.5 else "death"


def _mask(medoids) -> int:
    m = 0
    for i in medoids:
        m |= 1 << i
    return m


class _Memo:
    """Bounded memo of medoid-set scores; cleared wholesale when full."""

    def __init__(self, fn: Callable):
        self.fn = fn
        self.store: dict = {}

    def __call__(self, key, *args):
        hit = self.store.get(key)
        if hit is None:
            if len(self.store) >= CACHE_LIMIT:
                self.store.clear()
            hit = self.store[key] = self.fn(*args)
        return hit


def _layer_scorer(d: DistanceMatrix, cfg: LikelihoodConfig, prior: MedoidPriorConfig, flat: bool):
    """Memoised (log-likelihood + log-prior, labels) of a medoid tuple."""
    values = d.values

    def score(med: tuple):
        arr = np.asarray(med, dtype=np.intp)
        labels = nearest_medoid_labels(values, arr)
        ll = 0.0 if flat else loglik_rooted(d, arr, labels, cfg)
        return ll + float(log_medoid_prior_k(len(med), prior)), labels

    memo = _Memo(score)
    return lambda med: memo(_mask(med), med)


def _initial_medoids(d: DistanceMatrix, init, rng, second: bool = False) -> tuple[int, ...]:
    if isinstance(init, ExplicitInit):
        ms = init.medoids2 if second and init.medoids2 is not None else init.medoids
        ms.check(d.n)
        return ms.indices
    if isinstance(init, RandomInit):
        if not 1 <= init.k <= d.n:
            raise ValueError(f"initial K must lie in 1..{d.n}")
        return tuple(sorted(int(i) for i in rng.choice(d.n, size=init.k, replace=False)))
    if d.n < 4:
        return (0,)
    k = init.k if init.k is not None else elbow_k(d, default_k_range(d.n))
    return pam(d, min(k, d.n)).medoids.indices


def _accept(log_ratio: float, v: float) -> bool:
    return log_ratio >= 0 or v < math.exp(log_ratio)


# --- single layer -----------------------------------------------------------


def run_bdm(
    d: DistanceMatrix,
    cfg: LikelihoodConfig,
    prior: MedoidPriorConfig,
    chain: ChainConfig,
    flat_likelihood: bool = False,
) -> TraceSet:
    """Birth/death/move Metropolis-Hastings over one medoid set.

    Even iterations propose a move; odd iterations a birth or a death with
    probability 1/2 each.
    """
    rng = chain.rng()
    score = _layer_scorer(d, cfg, prior, flat_likelihood)
    pool = range(d.n)
    med = _initial_medoids(d, chain.init, rng)
    cur, labels = score(med)
    rec = _Recorder(chain, d.n, 1, True, False)
    u = rng.random((chain.iterations, 4))
    for t in range(1, chain.iterations + 1):
        u0, u1, u2, v = u[t - 1]
        kind = _kind(t, u0)
        prop = propose_medoids(med, pool, kind, u1, u2)
        accepted = False
        if prop is not None:
            new, new_labels = score(prop.medoids)
            if _accept(new - cur + prop.log_hastings, v):
                med, cur, labels = prop.medoids, new, new_labels
                accepted = True
        rec.tally(kind, accepted)
        if chain.keep(t):
            rec.record(t, [labels], [med], cur)
    return rec.finish()


def run_gibbs_indicators(
    d: DistanceMatrix,
    cfg: LikelihoodConfig,
    prior: MedoidPriorConfig,
    chain: ChainConfig,
    flat_likelihood: bool = False,
) -> TraceSet:
    """Systematic-scan Gibbs over medoid indicators; one iteration is a sweep.

    The empty set has no prior mass, so removing the last medoid is never
    chosen.
    """
    rng = chain.rng()
    score = _layer_scorer(d, cfg, prior, flat_likelihood)
    med = set(_initial_medoids(d, chain.init, rng))
    rec = _Recorder(chain, d.n, 1, True, False)
    u = rng.random((chain.iterations, d.n))
    cur = labels = None
    for t in range(1, chain.iterations + 1):
        for i in range(d.n):
            with_i = tuple(sorted(med | {i}))
            s1, lab1 = score(with_i)
            without = med - {i}
            if not without:
                rec.tally("indicator", False)
                med, cur, labels = set(with_i), s1, lab1
                continue
            s0, lab0 = score(tuple(sorted(without)))
            p1 = 1.0 / (1.0 + math.exp(min(700.0, s0 - s1)))
            take = u[t - 1, i] < p1
            rec.tally("indicator", take != (i in med))
            if take:
                med, cur, labels = set(with_i), s1, lab1
            else:
                med, cur, labels = without, s0, lab0
        if chain.keep(t):
            rec.record(t, [labels], [tuple(sorted(med))], cur)
    return rec.finish()


# --- nested layers ----------------------------------------------------------


def run_nested(
    mv: MultiViewData,
    cfg1: LikelihoodConfig,
    cfg2: LikelihoodConfig,
    priors: tuple[MedoidPriorConfig, MedoidPriorConfig],
    chain: ChainConfig,
    flat_likelihood: bool = False,
) -> TraceSet:
    """Layer-2 medoids constrained so the layer-2 partition refines layer 1.

    Each iteration makes one joint proposal (a layer-1 birth/death/move with
    layer-2 medoids repaired so every layer-1 cluster keeps one), then one
    restricted layer-2 proposal inside every layer-1 cluster.
    """
    rng = chain.rng()
    n = mv.n
    score1 = _layer_scorer(mv.d1, cfg1, priors[0], flat_likelihood)
    d2, prior2 = mv.d2, priors[1]

    def layer2(med2: tuple, labels1: np.ndarray):
        arr = np.asarray(med2, dtype=np.intp)
        lab = nested_labels(d2.values, labels1, arr)
        ll = 0.0 if flat_likelihood else loglik_rooted(d2, arr, lab, cfg2)
        return ll + float(log_medoid_prior_k(len(med2), prior2)), lab

    memo2 = _Memo(layer2)

    def score2(med2, med1, labels1):
        return memo2((_mask(med1), _mask(med2)), med2, labels1)

    med1 = _initial_medoids(mv.d1, chain.init, rng)
    s1, lab1 = score1(med1)
    med2 = repair_indices(lab1, med1, _initial_medoids(d2, chain.init, rng, second=True))
    s2, lab2 = score2(med2, med1, lab1)

    rec = _Recorder(chain, n, 2, True, False)
    pool = range(n)
    for t in range(1, chain.iterations + 1):
        u0, u1, u2, v = rng.random(4)
        kind = _kind(t, u0)
        prop = propose_medoids(med1, pool, kind, u1, u2)
        accepted = False
        if prop is not None:
            n1, nlab1 = score1(prop.medoids)
            nmed2 = repair_indices(nlab1, prop.medoids, med2)
            n2, nlab2 = score2(nmed2, prop.medoids, nlab1)
            if _accept(n1 + n2 - s1 - s2 + prop.log_hastings, v):
                med1, s1, lab1 = prop.medoids, n1, nlab1
                med2, s2, lab2 = nmed2, n2, nlab2
                accepted = True
        rec.tally(kind, accepted)

        clusters = Partition(lab1, len(med1)).clusters
        u = rng.random((len(clusters), 4))
        for c, members in enumerate(clusters):
            kind2 = "restricted-" + _kind(t, u[c, 0])
            prop = propose_medoids(med2, members.tolist(), kind2[11:], u[c, 1], u[c, 2])
            accepted = False
            if prop is not None:
                n2, nlab2 = score2(prop.medoids, med1, lab1)
                if _accept(n2 - s2 + prop.log_hastings, u[c, 3]):
                    med2, s2, lab2 = prop.medoids, n2, nlab2
                    accepted = True
            rec.tally(kind2, accepted)
        if chain.keep(t):
            rec.record(t, [lab1, lab2], [med1, med2], s1 + s2)
    return rec.finish()


# --- joint layers with the agreement penalty -----------------------------------


def _penalty_memo(alpha_prior: AlphaPriorConfig):
    def pen(lab1, lab2):
        return log_penalty_C(partition_distance(Partition(lab1, 0), Partition(lab2, 0)), alpha_prior)

    return _Memo(pen)


def draw_alpha(trace: TraceSet, alpha_prior: AlphaPriorConfig, rng) -> np.ndarray:
    """alpha | partitions for every retained draw, grouped by partition distance."""
    dist = np.array([
        partition_distance(Partition(a, 0), Partition(b, 0))
        for a, b in zip(trace.labels[0], trace.labels[1])
    ])
    out = np.zeros(len(dist))
    for dv in np.unique(dist):
        idx = np.flatnonzero(dist == dv)
        if math.isinf(dv):
            continue
        out[idx] = AlphaPosterior(float(dv), alpha_prior).sample(rng, len(idx))
    return out


def run_joint(
    mv: MultiViewData,
    cfg1: LikelihoodConfig,
    cfg2: LikelihoodConfig,
    priors: tuple[MedoidPriorConfig, MedoidPriorConfig],
    alpha_prior: AlphaPriorConfig,
    chain: ChainConfig,
    flat_likelihood: bool = False,
) -> TraceSet:
    """Two birth/death/move updates per iteration, coupled by the marginal
    agreement penalty; alpha is drawn afterwards given each retained pair."""
    rng = chain.rng()
    n = mv.n
    score1 = _layer_scorer(mv.d1, cfg1, priors[0], flat_likelihood)
    score2 = _layer_scorer(mv.d2, cfg2, priors[1], flat_likelihood)
    pen_memo = _penalty_memo(alpha_prior)

    def pen(m1, l1, m2, l2):
        return pen_memo((_mask(m1), _mask(m2)), l1, l2)

    med1 = _initial_medoids(mv.d1, chain.init, rng)
    med2 = _initial_medoids(mv.d2, chain.init, rng, second=True)
    s1, lab1 = score1(med1)
    s2, lab2 = score2(med2)
    c = pen(med1, lab1, med2, lab2)
    rec = _Recorder(chain, n, 2, True, True)
    pool = range(n)
    u = rng.random((chain.iterations, 8))
    for t in range(1, chain.iterations + 1):
        row = u[t - 1]
        kind = _kind(t, row[0])
        prop = propose_medoids(med1, pool, kind, row[1], row[2])
        accepted = False
        if prop is not None:
            n1, nlab1 = score1(prop.medoids)
            nc = pen(prop.medoids, nlab1, med2, lab2)
            if _accept(n1 + nc - s1 - c + prop.log_hastings, row[3]):
                med1, s1, lab1, c = prop.medoids, n1, nlab1, nc
                accepted = True
        rec.tally("layer1-" + kind, accepted)

        kind = _kind(t, row[4])
        prop = propose_medoids(med2, pool, kind, row[5], row[6])
        accepted = False
        if prop is not None:
            n2, nlab2 = score2(prop.medoids)
            nc = pen(med1, lab1, prop.medoids, nlab2)
            if _accept(n2 + nc - s2 - c + prop.log_hastings, row[7]):
                med2, s2, lab2, c = prop.medoids, n2, nlab2, nc
                accepted = True
        rec.tally("layer2-" + kind, accepted)
        if chain.keep(t):
            rec.record(t, [lab1, lab2], [med1, med2], s1 + s2 + c, 0.0)
    trace = rec.finish()
    trace.alpha = draw_alpha(trace, alpha_prior, rng)
    return trace


def run_joint_gibbs(
    mv: MultiViewData,
    cfg1: LikelihoodConfig,
    cfg2: LikelihoodConfig,
    priors: tuple[MedoidPriorConfig, MedoidPriorConfig],
    alpha_prior: AlphaPriorConfig,
    chain: ChainConfig,
    flat_likelihood: bool = False,
) -> TraceSet:
    """Indicator Gibbs sweeps for the joint model (both layers in turn).

    Costs O(N) likelihood evaluations per sweep; meant for cross-checking the
    birth/death/move kernel on small problems.
    """
    rng = chain.rng()
    n = mv.n
    scores = [
        _layer_scorer(mv.d1, cfg1, priors[0], flat_likelihood),
        _layer_scorer(mv.d2, cfg2, priors[1], flat_likelihood),
    ]
    pen_memo = _penalty_memo(alpha_prior)
    meds = [
        set(_initial_medoids(mv.d1, chain.init, rng)),
        set(_initial_medoids(mv.d2, chain.init, rng, second=True)),
    ]
    state = [scores[l](tuple(sorted(meds[l]))) for l in range(2)]
    rec = _Recorder(chain, n, 2, True, True)
    u = rng.random((chain.iterations, 2, n))

    def total(l, med, sc_lab):
        other = 1 - l
        omed = tuple(sorted(meds[other]))
        if l == 0:
            c = pen_memo((_mask(med), _mask(omed)), sc_lab[1], state[1][1])
        else:
            c = pen_memo((_mask(omed), _mask(med)), state[0][1], sc_lab[1])
        return sc_lab[0] + c

    for t in range(1, chain.iterations + 1):
        for l in range(2):
            for i in range(n):
                with_i = tuple(sorted(meds[l] | {i}))
                sl1 = scores[l](with_i)
                without = meds[l] - {i}
                if not without:
                    meds[l], state[l] = set(with_i), sl1
                    continue
                wo = tuple(sorted(without))
                sl0 = scores[l](wo)
                lp1, lp0 = total(l, with_i, sl1), total(l, wo, sl0)
                if lp1 == -math.inf and lp0 == -math.inf:
                    p1 = 0.5
                else:
                    p1 = 1.0 / (1.0 + math.exp(min(700.0, lp0 - lp1)))
                if u[t - 1, l, i] < p1:
                    meds[l], state[l] = set(with_i), sl1
                else:
                    meds[l], state[l] = set(without), sl0
        if chain.keep(t):
            m1, m2 = tuple(sorted(meds[0])), tuple(sorted(meds[1]))
            lp = state[0][0] + state[1][0] + pen_memo((_mask(m1), _mask(m2)), state[0][1], state[1][1])
            rec.record(t, [state[0][1], state[1][1]], [m1, m2], lp, 0.0)
    trace = rec.finish()
    trace.alpha = draw_alpha(trace, alpha_prior, rng)
    return trace


# --- Pitman-Yor partition samplers ---------------------------------------------


def _initial_labels(d: DistanceMatrix, init, rng) -> np.ndarray:
    if isinstance(init, RandomInit):
        return Partition.from_labels(rng.integers(0, init.k, size=d.n)).labels.copy()
    med = np.asarray(_initial_medoids(d, init, rng), dtype=np.intp)
    return Partition.from_labels(nearest_medoid_labels(d.values, med)).labels.copy()


def _categorical(logw: np.ndarray, u: float) -> int:
    w = np.exp(logw - logw.max())
    c = np.cumsum(w)
    return int(min(np.searchsorted(c, u * c[-1], side="right"), len(w) - 1))


def _stats(d, labels, cfg, flat):
    return FlatStats(labels) if flat else ClusterStats(d, labels, cfg)


def run_py_independent(
    d: DistanceMatrix,
    cfg: LikelihoodConfig,
    py: PYConfig,
    chain: ChainConfig,
    flat_likelihood: bool = False,
) -> TraceSet:
    """Marginal Gibbs over labels with a Pitman-Yor EPPF prior."""
    rng = chain.rng()
    stats = _stats(d, _initial_labels(d, chain.init, rng), cfg, flat_likelihood)
    rec = _Recorder(chain, d.n, 1, False, False)
    u = rng.random((chain.iterations, d.n))
    for t in range(1, chain.iterations + 1):
        for j in range(d.n):
            stats.remove(j)
            logw = stats.placement_deltas(j) + np.log(py_predictive_weights(stats.sizes, py))
            stats.add(j, _categorical(logw, u[t - 1, j]))
        if chain.keep(t):
            lab = Partition.from_labels(stats.labels).labels
            rec.record(t, [lab], [], stats.loglik() + log_py_eppf(stats.sizes, py))
    return rec.finish()


def _r_mates(labels: np.ndarray, kappa: np.ndarray, j: int) -> np.ndarray:
    """Members of R = {kappa = 1}, other than j, sharing j's label."""
    m = kappa & (labels == labels[j])
    m[j] = False
    return np.flatnonzero(m)


def _same_sets(a: np.ndarray, b: np.ndarray) -> bool:
    return len(a) == len(b) and bool(np.all(a == b))


def _log_pred_within_r(z2: np.ndarray, kappa: np.ndarray, i: int, py: PYConfig) -> float:
    """log EPPF(T2 on R + i) - log EPPF(T2 on R - i)."""
    r = kappa.copy()
    r[i] = False
    others = z2[r]
    nr = len(others)
    if nr == 0:
        return 0.0
    mates = int(np.count_nonzero(others == z2[i]))
    k = len(np.unique(others))
    num = mates - py.discount if mates > 0 else py.m + k * py.discount
    return math.log(num) - math.log(py.m + nr)


def py_dependent_log_post(z1, z2, kappa, alpha, ll1, ll2, py, alpha_prior) -> float:
    s1 = np.bincount(Partition.from_labels(z1).labels)
    s2 = np.bincount(Partition.from_labels(z2).labels)
    out = ll1 + ll2 + log_py_eppf(s1, py) + log_py_eppf(s2, py)
    r = np.flatnonzero(kappa)
    if len(r):
        out -= log_py_eppf(np.bincount(Partition.from_labels(z2[r]).labels), py)
    k = int(kappa.sum())
    n = len(kappa)
    out += k * math.log(alpha) if k else 0.0
    out += (n - k) * math.log1p(-alpha) if n - k else 0.0
    out += (alpha_prior.a - 1) * math.log(alpha) if alpha > 0 else 0.0
    out += (alpha_prior.b - 1) * math.log1p(-alpha) if alpha < 1 else 0.0
    return float(out)


def sample_alpha_conditional(kappa, alpha_prior: AlphaPriorConfig, rng, size=None):
    """alpha | kappa ~ Beta(a + sum kappa, b + N - sum kappa)."""
    kappa = np.asarray(kappa, dtype=bool)
    k = int(kappa.sum())
    return rng.beta(alpha_prior.a + k, alpha_prior.b + len(kappa) - k, size)


def run_py_dependent(
    mv: MultiViewData,
    cfg1: LikelihoodConfig,
    cfg2: LikelihoodConfig,
    py: PYConfig,
    alpha_prior: AlphaPriorConfig,
    chain: ChainConfig,
    flat_likelihood: bool = False,
    alpha_fixed: float | None = None,
) -> TraceSet:
    """Gibbs sampler for two stationary dependent Pitman-Yor partitions.

    ``kappa_i = 1`` pins object i to the same block in both layers; the set R
    of pinned objects must be grouped identically in both partitions.  Each
    sweep updates kappa, the free layer-2 labels, all layer-1 labels (subject
    to that constraint) and then alpha.  With ``alpha_fixed`` alpha is held.
    """
    rng = chain.rng()
    n = mv.n
    z = _initial_labels(mv.d1, chain.init, rng)
    st1 = _stats(mv.d1, z, cfg1, flat_likelihood)
    st2 = _stats(mv.d2, z, cfg2, flat_likelihood)
    kappa = np.zeros(n, dtype=bool)
    alpha = alpha_prior.a / (alpha_prior.a + alpha_prior.b)
    if alpha_fixed is not None:
        alpha = alpha_fixed
    rec = _Recorder(chain, n, 2, False, True)
    for t in range(1, chain.iterations + 1):
        u = rng.random((3, n))
        z1, z2 = st1.labels, st2.labels
        for i in range(n):
            if alpha <= 0.0:
                kappa[i] = False
                continue
            compat = _same_sets(_r_mates(z1, kappa, i), _r_mates(z2, kappa, i))
            if not compat:
                kappa[i] = False
                continue
            if alpha >= 1.0:
                kappa[i] = True
                continue
            ratio = math.exp(_log_pred_within_r(z2, kappa, i, py))
            kappa[i] = u[0, i] < alpha / (alpha + (1.0 - alpha) * ratio)

        for j in np.flatnonzero(~kappa):
            st2.remove(j)
            logw = st2.placement_deltas(j) + np.log(py_predictive_weights(st2.sizes, py))
            st2.add(j, _categorical(logw, u[1, j]))

        z2 = st2.labels
        for j in range(n):
            st1.remove(j)
            logw = st1.placement_deltas(j) + np.log(py_predictive_weights(st1.sizes, py))
            if kappa[j]:
                allowed = np.zeros(st1.k + 1, dtype=bool)
                mates = _r_mates(z2, kappa, j)
                if len(mates):
                    allowed[st1.labels[mates[0]]] = True
                else:
                    pinned = kappa.copy()
                    pinned[j] = False
                    allowed[:] = True
                    allowed[np.unique(st1.labels[pinned])] = False
                logw = np.where(allowed, logw, -np.inf)
            st1.add(j, _categorical(logw, u[2, j]))

        if alpha_fixed is None:
            alpha = float(sample_alpha_conditional(kappa, alpha_prior, rng))
        if chain.keep(t):
            l1 = Partition.from_labels(st1.labels).labels
            l2 = Partition.from_labels(st2.labels).labels
            lp = py_dependent_log_post(
                l1, l2, kappa, alpha, st1.loglik(), st2.loglik(), py, alpha_prior
            )
            rec.record(t, [l1, l2], [], lp, alpha)
    return rec.finish()
