"""Containers for MCMC output and their on-disk formats."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class TraceSet:
    """Retained draws of one chain (or several merged chains).

    ``labels[l]`` is a (draws x N) integer array for layer ``l``; ``medoids[l]``
    holds one sorted tuple per draw, or is empty for samplers without medoids.
    """

    labels: list[np.ndarray]
    medoids: list[list[tuple[int, ...]]]
    log_post: np.ndarray
    iterations: np.ndarray
    alpha: np.ndarray | None = None
    accept: dict = field(default_factory=dict)
    chain: np.ndarray | None = None

    @property
    def n_draws(self) -> int:
        return len(self.log_post)

    @property
    def n_layers(self) -> int:
        return len(self.labels)

    def layer(self, layer: int) -> np.ndarray:
        return self.labels[layer]

    def acceptance_rates(self) -> dict:
        return {k: (a / p if p else float("nan")) for k, (a, p) in self.accept.items()}

    @staticmethod
    def merge(traces: list["TraceSet"]) -> "TraceSet":
        layers = traces[0].n_layers
        accept: dict = {}
        for t in traces:
            for k, (a, p) in t.accept.items():
                acc = accept.setdefault(k, [0, 0])
                acc[0] += a
                acc[1] += p
        alpha = None
        if traces[0].alpha is not None:
            alpha = np.concatenate([t.alpha for t in traces])
        return TraceSet(
            labels=[np.concatenate([t.labels[l] for t in traces]) for l in range(layers)],
            medoids=[sum((t.medoids[l] for t in traces), []) for l in range(layers)],
            log_post=np.concatenate([t.log_post for t in traces]),
            iterations=np.concatenate([t.iterations for t in traces]),
            alpha=alpha,
            accept={k: tuple(v) for k, v in accept.items()},
            chain=np.concatenate([
                np.full(t.n_draws, i) if t.chain is None else t.chain
                for i, t in enumerate(traces)
            ]),
        )


def write_trace_ndjson(path, trace: TraceSet) -> None:
    """One JSON record per retained draw; indices and labels are 1-based."""
    with open(path, "w") as fh:
        for r in range(trace.n_draws):
            rec = {
                "iter": int(trace.iterations[r]),
                "chain": int(trace.chain[r]) if trace.chain is not None else 0,
                "medoids": [
                    [i + 1 for i in trace.medoids[l][r]] if trace.medoids[l] else None
                    for l in range(trace.n_layers)
                ],
                "labels": [(trace.labels[l][r] + 1).tolist() for l in range(trace.n_layers)],
                "alpha": None if trace.alpha is None else float(trace.alpha[r]),
                "log_post": float(trace.log_post[r]),
            }
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_trace_ndjson(path) -> TraceSet:
    recs = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
    if not recs:
        return TraceSet([], [], np.zeros(0), np.zeros(0, dtype=int))
    layers = len(recs[0]["labels"])
    has_med = [recs[0]["medoids"][l] is not None for l in range(layers)]
    has_alpha = recs[0]["alpha"] is not None
    return TraceSet(
        labels=[np.array([r["labels"][l] for r in recs], dtype=np.intp) - 1 for l in range(layers)],
        medoids=[
            [tuple(i - 1 for i in r["medoids"][l]) for r in recs] if has_med[l] else []
            for l in range(layers)
        ],
        log_post=np.array([r["log_post"] for r in recs]),
        iterations=np.array([r["iter"] for r in recs], dtype=np.int64),
        alpha=np.array([r["alpha"] for r in recs]) if has_alpha else None,
        chain=np.array([r.get("chain", 0) for r in recs], dtype=np.int64),
    )


def write_label_matrix(path, labels: np.ndarray) -> None:
    np.savetxt(path, np.asarray(labels) + 1, delimiter=",", fmt="%d")
