"""Command-line front end: simulate | hyper | fit | score | summarize."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import shutil
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    MedoidSet,
    MultiViewData,
    Partition,
    ValidationError,
    read_distance,
    read_labels,
    write_distance_csv,
    write_labels,
)
from .hyper import DegenerateDistances, select_hyperparameters, singleton_prefilter
from .kmedoids import pam
from .likelihood import InvalidConfig, LikelihoodConfig, Mode
from .numerics import NumericsError
from .posterior import (
    adjusted_rand,
    coclustering,
    k_posterior,
    point_estimate,
    rand_index,
    variation_of_information,
    write_coclustering_csv,
    write_coclustering_pgm,
)
from .priors import AlphaPriorConfig, MedoidPriorConfig, PYConfig
from .samplers import (
    ChainConfig,
    ExplicitInit,
    PamInit,
    RandomInit,
    run_bdm,
    run_joint,
    run_nested,
    run_py_dependent,
    run_py_independent,
)
from .simulate import SimConfig, gamma_quantile_transform, simulate_two_layer
from .trace import TraceSet, read_trace_ndjson, write_label_matrix, write_trace_ndjson

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

MODELS = ("tess-indep", "tess-nested", "tess-joint", "py-indep", "py-joint", "kmedoids")
LIK_KEYS = ("delta1", "delta2", "mu", "beta", "zeta", "gamma_rate", "theta_rate")

log = logging.getLogger("bdclust")


class ArgumentError(Exception):
    pass


# --- config files -------------------------------------------------------------


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ArgumentError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


def format_config(cfg: dict) -> str:
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ArgumentError(f"not a boolean: {v!r}")


def likelihood_entries(cfg: LikelihoodConfig, layer: int) -> dict:
    pre = "" if layer == 1 else "layer2."
    out = {pre + k: repr(float(getattr(cfg, k))) for k in LIK_KEYS}
    out[pre + "likelihood"] = cfg.mode.value
    out[pre + "repulsion"] = str(cfg.repulsion).lower()
    return out


def likelihood_from_entries(entries: dict, layer: int) -> LikelihoodConfig | None:
    pre = "" if layer == 1 else "layer2."
    if not any(pre + k in entries for k in LIK_KEYS):
        return None
    kw = {k: float(entries[pre + k]) for k in LIK_KEYS if pre + k in entries}
    if pre + "likelihood" in entries:
        kw["mode"] = Mode(entries[pre + "likelihood"])
    if pre + "repulsion" in entries:
        kw["repulsion"] = _as_bool(entries[pre + "repulsion"])
    return LikelihoodConfig(**kw)


# --- manifest -------------------------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out: Path, command: str, args: dict, inputs: dict, timings: dict,
                   seed=None, config_text: str | None = None) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "args": args,
        "config_digest": None if config_text is None else hashlib.sha256(config_text.encode()).hexdigest(),
        "data_digests": {k: sha256_file(v) for k, v in inputs.items() if v},
        "timings": timings,
        "wall_clock": sum(timings.values()),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


class _Timer:
    def __init__(self):
        self.phases: dict[str, float] = {}

    def __call__(self, name):
        timer = self

        class _Phase:
            def __enter__(self):
                self.t0 = time.perf_counter()
                log.info("%s ...", name)

            def __exit__(self, *exc):
                timer.phases[name] = round(time.perf_counter() - self.t0, 6)
                log.info("%s done in %.2fs", name, timer.phases[name])

        return _Phase()


def _plain_args(ns: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(ns).items() if k != "func"}


# --- simulate ---------------------------------------------------------------------


def cmd_simulate(ns) -> int:
    if not ns.sigma > 0:
        raise ArgumentError("--sigma must be positive")
    if not 0 <= ns.alpha <= 1:
        raise ArgumentError("--alpha must lie in [0, 1]")
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    timer = _Timer()
    with timer("simulate"):
        try:
            cfg = SimConfig(n=ns.n, n_clusters=ns.clusters, dim=ns.dim, sigma_s=ns.sigma,
                            alpha_s=ns.alpha, dirichlet_m=ns.dirichlet_m, seed=ns.seed)
        except ValueError as e:
            raise ArgumentError(str(e)) from e
        sim = simulate_two_layer(cfg)
        d1, d2 = sim.d1, sim.d2
        if ns.gamma_transform:
            d1, d2 = gamma_quantile_transform(d1), gamma_quantile_transform(d2)
    write_distance_csv(out / "d1.csv", d1)
    write_distance_csv(out / "d2.csv", d2)
    write_labels(out / "truth1.csv", sim.z1_true)
    write_labels(out / "truth2.csv", sim.z2_true)
    write_manifest(out, "simulate", _plain_args(ns), {}, timer.phases, seed=ns.seed)
    print(f"wrote {out}/d1.csv d2.csv truth1.csv truth2.csv")
    return EXIT_OK


# --- hyper ---------------------------------------------------------------------------


def _k_range(ns):
    if ns.k_min is None and ns.k_max is None:
        return None
    if ns.k_min is None or ns.k_max is None:
        raise ArgumentError("--k-min and --k-max go together")
    return ns.k_min, ns.k_max


def _hyper_entries(d_list, mode, repulsion, k_range) -> tuple[dict, list]:
    entries, selections = {}, []
    for layer, d in enumerate(d_list, 1):
        sel = select_hyperparameters(d, k_range=k_range, mode=mode, repulsion=repulsion)
        entries.update(likelihood_entries(sel.cfg, layer))
        entries[("" if layer == 1 else "layer2.") + "k_elbow"] = str(sel.k_elbow)
        selections.append(sel)
    return entries, selections


def cmd_hyper(ns) -> int:
    d_list = [read_distance(ns.d1)] + ([read_distance(ns.d2)] if ns.d2 else [])
    entries, sel = _hyper_entries(d_list, Mode(ns.likelihood), ns.repulsion, _k_range(ns))
    text = format_config(entries)
    if ns.out:
        Path(ns.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


# --- fit -----------------------------------------------------------------------------


def _run_chain(job: dict) -> TraceSet:
    kind = job["model"]
    chain = job["chain"]
    if kind == "tess-indep":
        return run_bdm(job["d"][0], job["cfg"][0], job["prior"][0], chain)
    if kind == "tess-nested":
        mv = MultiViewData(*job["d"])
        return run_nested(mv, *job["cfg"], tuple(job["prior"]), chain)
    if kind == "tess-joint":
        mv = MultiViewData(*job["d"])
        return run_joint(mv, *job["cfg"], tuple(job["prior"]), job["alpha"], chain)
    if kind == "py-indep":
        return run_py_independent(job["d"][0], job["cfg"][0], job["py"], chain)
    if kind == "py-joint":
        mv = MultiViewData(*job["d"])
        return run_py_dependent(mv, *job["cfg"], job["py"], job["alpha"], chain)
    raise ArgumentError(f"unknown model {kind}")


def _run_layer_independent(job: dict, layer: int) -> TraceSet:
    sub = dict(job, d=[job["d"][layer]], cfg=[job["cfg"][layer]], prior=[job["prior"][layer]])
    init = job["chain"].init
    if isinstance(init, ExplicitInit) and layer == 1 and init.medoids2 is not None:
        sub["chain"] = replace(job["chain"], init=ExplicitInit(init.medoids2))
    return _run_chain(sub)


def _chain_job(job: dict) -> TraceSet:
    """One chain; independent two-layer models run each layer separately."""
    if job["model"] in ("tess-indep", "py-indep") and len(job["d"]) == 2:
        t1 = _run_layer_independent(job, 0)
        t2 = _run_layer_independent(job, 1)
        return TraceSet(
            labels=[t1.labels[0], t2.labels[0]],
            medoids=[t1.medoids[0], t2.medoids[0]],
            log_post=t1.log_post + t2.log_post,
            iterations=t1.iterations,
            accept={**{f"layer1-{k}": v for k, v in t1.accept.items()},
                    **{f"layer2-{k}": v for k, v in t2.accept.items()}},
        )
    return _run_chain(job)


def _workers(chains: int) -> int:
    cap = os.environ.get("BDC_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError as e:
            raise ArgumentError(f"BDC_THREADS must be an integer, got {cap!r}") from e
    return max(1, min(chains, limit))


def _run_chains(job: dict, chains: int, seed: int) -> TraceSet:
    if chains == 1:
        seeds = [seed]
    else:
        seeds = np.random.SeedSequence(seed).spawn(chains)
    jobs = [dict(job, chain=replace(job["chain"], seed=s)) for s in seeds]
    workers = _workers(chains)
    if workers == 1:
        traces = [_chain_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_chain_job, jobs))
    for i, t in enumerate(traces):
        t.chain = np.full(t.n_draws, i)
    return traces[0] if chains == 1 else TraceSet.merge(traces)


def _resolve_likelihoods(ns, entries: dict, d_list, timer) -> list[LikelihoodConfig]:
    mode = Mode(ns.likelihood)
    cfgs = [likelihood_from_entries(entries, l) for l in (1, 2)][: len(d_list)]
    if len(cfgs) == 2 and cfgs[1] is None and cfgs[0] is not None:
        cfgs[1] = cfgs[0]
    if any(c is None for c in cfgs):
        with timer("hyper"):
            sel_entries, _ = _hyper_entries(d_list, mode, ns.repulsion, _k_range(ns))
        entries.update({k: v for k, v in sel_entries.items() if k not in entries})
        cfgs = [likelihood_from_entries(entries, l) for l in (1, 2)][: len(d_list)]
    # explicit flags beat file values
    out = []
    for c in cfgs:
        kw = {}
        if ns.likelihood_given or ns.model.startswith("py-"):
            kw["mode"] = mode
        if ns.repulsion_given:
            kw["repulsion"] = ns.repulsion
        out.append(c.with_(**kw))
    return out


def _init(ns, d_list):
    if ns.medoids:
        sets = [MedoidSet.of([int(i) - 1 for i in part.split(",")], d_list[0].n)
                for part in ns.medoids.split(";")]
        return ExplicitInit(sets[0], sets[1] if len(sets) > 1 else None)
    if ns.init == "random":
        return RandomInit(ns.k or 1)
    return PamInit(ns.k)


def _write_layer_outputs(out: Path, trace: TraceSet, layer: int, kept, n_total, truth):
    tag = f"layer{layer + 1}"
    write_label_matrix(out / f"labels_{tag}.csv", trace.labels[layer])
    cc = coclustering(trace, layer)
    write_coclustering_csv(out / f"coclustering_{tag}.csv", cc)
    write_coclustering_pgm(out / f"coclustering_{tag}.pgm", cc)
    est = _expand(point_estimate(trace, layer).labels, kept, n_total)
    write_labels(out / f"estimate_{tag}.csv", est)
    summary = {"k_posterior": k_posterior(trace, layer).as_dict(), "k_estimate": int(est.max()) + 1}
    if truth is not None:
        summary.update(_scores(est, truth))
    return summary


def _expand(labels: np.ndarray, kept, n_total: int) -> np.ndarray:
    """Map labels on the kept objects back to all objects; removed ones are singletons."""
    if kept is None:
        return labels
    full = np.empty(n_total, dtype=np.intp)
    full[kept] = labels
    rest = np.setdiff1d(np.arange(n_total), kept)
    full[rest] = labels.max() + 1 + np.arange(len(rest))
    return Partition.from_labels(full).labels


def _scores(est, truth) -> dict:
    if len(est) != len(truth):
        raise ValidationError(f"estimate has {len(est)} labels, truth has {len(truth)}")
    e, t = Partition.from_labels(est), Partition.from_labels(truth)
    return {"ri": rand_index(e, t), "ari": adjusted_rand(e, t),
            "vi": variation_of_information(e, t), "k": e.k}


def cmd_fit(ns) -> int:
    model = ns.model
    if model.startswith("py-"):
        if ns.likelihood == "linear":
            raise ArgumentError("py-* models need the quadratic likelihood (they have no medoids)")
        ns.likelihood = "quadratic"
    ns.likelihood = ns.likelihood or "linear"
    two_layer = model in ("tess-nested", "tess-joint", "py-joint")
    if two_layer and not ns.d2:
        raise ArgumentError(f"--model {model} needs --d2")
    if ns.burnin >= ns.iters:
        raise ArgumentError("--burnin must be smaller than --iters")
    if ns.thin < 1 or ns.chains < 1:
        raise ArgumentError("--thin and --chains must be positive")

    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    timer = _Timer()
    inputs = {"d1": ns.d1, "d2": ns.d2, "config": ns.config, "truth1": ns.truth1, "truth2": ns.truth2}
    with timer("load"):
        d_list = [read_distance(ns.d1)] + ([read_distance(ns.d2)] if ns.d2 else [])
        if len(d_list) == 2:
            MultiViewData(*d_list)
        truths = [read_labels(p) if p else None for p in (ns.truth1, ns.truth2)]
    n_total = d_list[0].n
    for p, name in ((ns.truth1, "truth1.csv"), (ns.truth2, "truth2.csv")):
        if p and Path(p).resolve() != (out / name).resolve():
            shutil.copyfile(p, out / name)

    kept = singletons = None
    if ns.singleton_threshold is not None:
        with timer("prefilter"):
            kept, singletons, d0 = singleton_prefilter(d_list[0], ns.singleton_quantile, ns.singleton_threshold)
            if len(kept) < 2:
                raise ValidationError("prefilter left fewer than two objects")
            d_list = [d0] + [d.subset(kept) for d in d_list[1:]]
        log.info("prefilter kept %d of %d objects", len(kept), n_total)

    summary: dict = {"model": model, "n": n_total}
    if kept is not None:
        summary["kept"] = (kept + 1).tolist()
        summary["singletons"] = (singletons + 1).tolist()

    if model == "kmedoids":
        if ns.k is None:
            raise ArgumentError("--model kmedoids needs --k")
        layers = []
        with timer("pam"):
            for l, d in enumerate(d_list):
                res = pam(d, ns.k)
                est = _expand(res.labels.labels, kept, n_total)
                write_labels(out / f"estimate_layer{l + 1}.csv", est)
                info = {"cost": res.cost, "medoids": [int(i) + 1 for i in res.medoids],
                        "iterations": res.iterations}
                if truths[l] is not None:
                    info.update(_scores(est, truths[l]))
                layers.append(info)
        summary["layers"] = layers
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        write_manifest(out, "fit", _plain_args(ns), inputs, timer.phases, seed=ns.seed)
        print(json.dumps(summary["layers"], indent=2))
        return EXIT_OK

    entries = read_config(ns.config) if ns.config else {}
    cfgs = _resolve_likelihoods(ns, entries, d_list, timer)
    p = ns.p if ns.p is not None else float(entries.get("p", 0.5))
    n = d_list[0].n
    resolved = {**entries}
    for l, c in enumerate(cfgs, 1):
        resolved.update(likelihood_entries(c, l))
    resolved.update({"model": model, "p": repr(p), "iters": str(ns.iters), "burnin": str(ns.burnin),
                     "thin": str(ns.thin), "seed": str(ns.seed), "chains": str(ns.chains)})
    py = PYConfig(ns.py_m, ns.py_discount)
    alpha = AlphaPriorConfig(ns.alpha_a, ns.alpha_b)
    if model.startswith("py-"):
        resolved.update({"py_m": repr(py.m), "py_discount": repr(py.discount)})
    if model in ("tess-joint", "py-joint"):
        resolved.update({"alpha_a": repr(alpha.a), "alpha_b": repr(alpha.b)})
    config_text = format_config(resolved)
    (out / "config.txt").write_text(config_text)

    job = {
        "model": model,
        "d": d_list,
        "cfg": cfgs,
        "prior": [MedoidPriorConfig(p, n)] * len(d_list),
        "py": py,
        "alpha": alpha,
        "chain": ChainConfig(ns.iters, ns.burnin, ns.thin, ns.seed, _init(ns, d_list)),
    }
    with timer("sample"):
        trace = _run_chains(job, ns.chains, ns.seed)
    with timer("summarize"):
        write_trace_ndjson(out / "trace.ndjson", trace)
        layers = [
            _write_layer_outputs(out, trace, l, kept, n_total, truths[l])
            for l in range(trace.n_layers)
        ]
        summary["layers"] = layers
        summary["acceptance"] = trace.acceptance_rates()
        if trace.alpha is not None:
            summary["alpha_median"] = float(np.median(trace.alpha))
        (out / "k_posterior.json").write_text(
            json.dumps([l["k_posterior"] for l in layers], indent=2) + "\n"
        )
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    write_manifest(out, "fit", _plain_args(ns), inputs, timer.phases, seed=ns.seed,
                   config_text=config_text)
    for l, info in enumerate(layers, 1):
        extra = f" ARI={info['ari']:.4f}" if "ari" in info else ""
        print(f"layer {l}: K mean={info['k_posterior']['mean']:.2f} estimate K={info['k_estimate']}{extra}")
    return EXIT_OK


# --- score / summarize ----------------------------------------------------------------


def _batch_table(root: Path, layer: int) -> dict:
    rows = []
    for est in sorted(root.glob(f"*/estimate_layer{layer}.csv")):
        truth = est.parent / f"truth{layer}.csv"
        if truth.exists():
            rows.append(_scores(read_labels(est), read_labels(truth)))
    if not rows:
        raise ValidationError(f"no run directories with estimate and truth under {root}")
    table = {"replicates": len(rows)}
    for key in ("ri", "ari", "vi", "k"):
        vals = np.array([r[key] for r in rows], dtype=float)
        q25, med, q75 = np.percentile(vals, [25, 50, 75])
        table[key] = {"median": med, "q25": q25, "q75": q75, "iqr": q75 - q25}
    return table


def cmd_score(ns) -> int:
    if ns.batch:
        table = _batch_table(Path(ns.batch), ns.layer)
        print(f"replicates: {table['replicates']}")
        print(f"{'metric':<8}{'median':>10}{'q25':>10}{'q75':>10}{'iqr':>10}")
        for key in ("ri", "ari", "vi", "k"):
            r = table[key]
            print(f"{key:<8}{r['median']:>10.4f}{r['q25']:>10.4f}{r['q75']:>10.4f}{r['iqr']:>10.4f}")
        report = table
    else:
        if not (ns.estimate and ns.truth):
            raise ArgumentError("score needs --estimate and --truth, or --batch")
        report = _scores(read_labels(ns.estimate), read_labels(ns.truth))
        for k, v in report.items():
            print(f"{k} {v:.6g}" if isinstance(v, float) else f"{k} {v}")
    if ns.out:
        Path(ns.out).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def cmd_summarize(ns) -> int:
    run = Path(ns.run)
    trace = read_trace_ndjson(run / "trace.ndjson")
    if trace.n_draws == 0:
        raise ValidationError(f"{run / 'trace.ndjson'} holds no draws")
    report = {"draws": trace.n_draws, "layers": []}
    for l in range(trace.n_layers):
        info = {"k_posterior": k_posterior(trace, l).as_dict()}
        est = point_estimate(trace, l).labels
        info["k_estimate"] = int(est.max()) + 1
        truth = run / f"truth{l + 1}.csv"
        if truth.exists() and len(read_labels(truth)) == len(est):
            info.update(_scores(est, read_labels(truth)))
        report["layers"].append(info)
    if trace.alpha is not None:
        report["alpha_median"] = float(np.median(trace.alpha))
    text = json.dumps(report, indent=2) + "\n"
    if ns.out:
        Path(ns.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


# --- parser -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(message)


class _Flag(argparse.Action):
    """Store a value and remember that it was given explicitly."""

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        setattr(namespace, self.dest + "_given", True)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bdclust", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log one line per phase")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="two-layer Gaussian mixture benchmark data")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--clusters", type=int, default=10)
    s.add_argument("--dim", type=int, default=10)
    s.add_argument("--sigma", type=float, default=0.1)
    s.add_argument("--alpha", type=float, default=0.0, help="fraction of copied layer-1 labels")
    s.add_argument("--dirichlet-m", type=float, default=10.0)
    s.add_argument("--gamma-transform", action="store_true",
                   help="standardise and map distances through the Gamma(3, 5) quantile")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    h = sub.add_parser("hyper", help="select likelihood hyperparameters")
    h.add_argument("--d1", required=True)
    h.add_argument("--d2")
    h.add_argument("--likelihood", choices=[m.value for m in Mode], default="linear")
    h.add_argument("--repulsion", action=argparse.BooleanOptionalAction, default=True)
    h.add_argument("--k-min", type=int)
    h.add_argument("--k-max", type=int)
    h.add_argument("--out")
    h.set_defaults(func=cmd_hyper)

    f = sub.add_parser("fit", help="run a sampler and summarise it")
    f.add_argument("--model", choices=MODELS, required=True)
    f.add_argument("--d1", required=True)
    f.add_argument("--d2")
    f.add_argument("--config", help="flat key = value file; flags override it")
    f.add_argument("--likelihood", choices=[m.value for m in Mode], action=_Flag,
                   help="default: linear for tess-* models, quadratic for py-*")
    f.add_argument("--repulsion", action=argparse.BooleanOptionalAction, default=True)
    f.add_argument("--p", type=float, help="truncated-geometric parameter of the medoid prior")
    f.add_argument("--py-m", type=float, default=1.0)
    f.add_argument("--py-discount", type=float, default=0.01)
    f.add_argument("--alpha-a", type=float, default=1.0)
    f.add_argument("--alpha-b", type=float, default=1.0)
    f.add_argument("--iters", type=int, default=10_000)
    f.add_argument("--burnin", type=int, default=2_500)
    f.add_argument("--thin", type=int, default=1)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--chains", type=int, default=1)
    f.add_argument("--init", choices=["pam", "random"], default="pam")
    f.add_argument("--k", type=int, help="K for kmedoids, or the initial K")
    f.add_argument("--medoids", help="explicit 1-based initial medoids, layers split by ';'")
    f.add_argument("--k-min", type=int)
    f.add_argument("--k-max", type=int)
    f.add_argument("--singleton-threshold", type=float)
    f.add_argument("--singleton-quantile", type=float, default=0.01)
    f.add_argument("--truth1")
    f.add_argument("--truth2")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit, likelihood_given=False)

    c = sub.add_parser("score", help="compare an estimate with the truth")
    c.add_argument("--estimate")
    c.add_argument("--truth")
    c.add_argument("--batch", help="directory of run directories")
    c.add_argument("--layer", type=int, default=1)
    c.add_argument("--out")
    c.set_defaults(func=cmd_score)

    m = sub.add_parser("summarize", help="recompute summaries from a run directory")
    m.add_argument("--run", required=True)
    m.add_argument("--out")
    m.set_defaults(func=cmd_summarize)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(argv)
    except ArgumentError as e:
        print(f"bdclust: argument error: {e}", file=sys.stderr)
        return EXIT_ARGS
    # a boolean flag counts as given when it appears on the command line
    ns.repulsion_given = any(a in ("--repulsion", "--no-repulsion") for a in argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s", stream=sys.stderr)
    try:
        return ns.func(ns)
    except (ArgumentError, InvalidConfig) as e:
        print(f"bdclust: argument error: {e}", file=sys.stderr)
        return EXIT_ARGS
    except (ValidationError, DegenerateDistances, OSError, ValueError) as e:
        if isinstance(e, (NumericsError, FloatingPointError)):
            print(f"bdclust: numeric error: {e}", file=sys.stderr)
            return EXIT_NUMERIC
        where = f" ({e.filename})" if isinstance(e, OSError) and e.filename else ""
        print(f"bdclust: data error{where}: {e}", file=sys.stderr)
        return EXIT_DATA
    except (NumericsError, FloatingPointError, ArithmeticError) as e:
        print(f"bdclust: numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
