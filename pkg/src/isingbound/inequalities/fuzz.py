"""Randomised campaigns against the boundary-influence and correlation checkers."""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import IsingGraph, IsingInstance, dump_instance, extended_to_json
from ..seeds import child_rng
from .reports import DEFAULT_TOL
from .theorem import check_boundary_influence, check_correlation

INF_FRACTION = 0.1
H_INF_FRACTION = 0.2
EDGE_P = 0.5


def random_connected_graph(rng: np.random.Generator, n: int, p: float = EDGE_P) -> IsingGraph:
    """Erdos-Renyi G(n, p) conditioned on connectivity (by rejection), J ~ U(0, 2]."""
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    while True:
        keep = rng.random(len(pairs)) < p
        chosen = [pr for pr, k in zip(pairs, keep) if k]
        J = 2.0 - rng.uniform(0.0, 2.0, len(chosen))
        graph = IsingGraph(n, tuple((u, v, float(j)) for (u, v), j in zip(chosen, J)))
        if graph.is_connected():
            return graph


def random_field(rng: np.random.Generator, n: int, scale: float) -> list:
    g = rng.uniform(-scale, scale, n)
    promote = rng.random(n) < INF_FRACTION
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return [float(s * math.inf) if p else float(x) for x, p, s in zip(g, promote, signs)]


def random_h(rng: np.random.Generator, g: list, scale: float) -> list:
    n = len(g)
    support = rng.random(n) < 0.5
    mags = rng.uniform(0.0, scale, n)
    infinite = rng.random(n) < H_INF_FRACTION
    h = []
    for v in range(n):
        if not support[v]:
            h.append(0.0)
        elif infinite[v] and math.isfinite(g[v]):
            h.append(math.inf)
        else:
            h.append(float(mags[v]))
    return h


@dataclass
class TrialResult:
    index: int
    digest: str
    theorem_margin: float
    correlation_margin: float
    theorem_ok: bool
    correlation_ok: bool
    record: dict


def run_trial(seed: int, index: int, n_range: tuple, scale: float, tolerance: float, zero_field: bool = False) -> TrialResult:
    rng = child_rng(seed, "fuzz", index)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    graph = random_connected_graph(rng, n)
    g = [0.0] * n if zero_field else random_field(rng, n, scale)
    h = random_h(rng, g, scale)
    o = int(rng.integers(n))
    u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
    inst = IsingInstance(graph, 1.0, tuple(g))
    thm = check_boundary_influence(inst, h, o, tolerance)
    cor = check_correlation(inst, u, v, tolerance)
    record = {
        "index": index,
        "instance": inst.to_dict(),
        "query": {"h": [extended_to_json(x) for x in h], "o": o, "u": u, "v": v},
        "theorem": thm.to_dict(),
        "correlation": cor.to_dict(),
    }
    return TrialResult(index, thm.instance_digest, thm.margin, cor.margin, thm.holds, cor.holds, record)


def _run_block(args):
    seed, indices, n_range, scale, tolerance, zero_field = args
    return [run_trial(seed, i, n_range, scale, tolerance, zero_field) for i in indices]


@dataclass
class CampaignSummary:
    seed: int
    trials: int
    n_range: tuple
    field_scale: float
    tolerance: float
    theorem_violations: int = 0
    correlation_violations: int = 0
    worst_theorem_margin: float = math.inf
    worst_theorem_digest: str = ""
    worst_correlation_margin: float = math.inf
    worst_correlation_digest: str = ""
    max_abs_theorem_margin: float = 0.0
    campaign_digest: str = ""
    reproducers: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return self.theorem_violations + self.correlation_violations

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["n_range"] = list(self.n_range)
        d["violations"] = self.violations
        return d


def fuzz_inequalities(
    seed: int,
    n_range: tuple = (2, 8),
    trials: int = 10_000,
    field_scale: float = 3.0,
    tolerance: float = DEFAULT_TOL,
    threads: int = 1,
    reproducer_dir: str | os.PathLike | None = None,
    zero_field: bool = False,
    on_trial=None,
) -> CampaignSummary:
    """Run ``trials`` independent random checks; violations are returned as data.

    Each trial draws its own stream from ``(seed, index)``, so the summary
    does not depend on ``threads``.
    """
    lo, hi = int(n_range[0]), int(n_range[1])
    if lo < 2 or hi < lo:
        raise ValueError(f"n_range must satisfy 2 <= lo <= hi, got {n_range}")
    summary = CampaignSummary(int(seed), int(trials), (lo, hi), float(field_scale), float(tolerance))
    block = 250
    jobs = [
        (seed, range(s, min(s + block, trials)), (lo, hi), field_scale, tolerance, zero_field)
        for s in range(0, trials, block)
    ]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(_run_block, jobs))
    else:
        blocks = [_run_block(j) for j in jobs]

    h = hashlib.sha256()
    for results in blocks:
        for r in results:
            h.update(f"{r.index}:{r.digest}:{r.theorem_margin!r}:{r.correlation_margin!r};".encode())
            if on_trial is not None:
                on_trial(r)
            summary.max_abs_theorem_margin = max(summary.max_abs_theorem_margin, abs(r.theorem_margin))
            if r.theorem_margin < summary.worst_theorem_margin:
                summary.worst_theorem_margin = r.theorem_margin
                summary.worst_theorem_digest = r.digest
            if r.correlation_margin < summary.worst_correlation_margin:
                summary.worst_correlation_margin = r.correlation_margin
                summary.worst_correlation_digest = r.record["correlation"]["instance_digest"]
            if not (r.theorem_ok and r.correlation_ok):
                summary.theorem_violations += not r.theorem_ok
                summary.correlation_violations += not r.correlation_ok
                if reproducer_dir is not None:
                    summary.reproducers.append(str(write_reproducer(reproducer_dir, r)))
    summary.campaign_digest = h.hexdigest()[:16]
    return summary


def write_reproducer(directory, result: TrialResult) -> Path:
    """Instance document plus a ``query`` block, one file per violating trial."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"violation-{result.index:06d}-{result.digest}.json"
    inst = IsingInstance.from_dict(result.record["instance"])
    extra = {
        "query": result.record["query"],
        "theorem": result.record["theorem"],
        "correlation": result.record["correlation"],
    }
    dump_instance(inst, path, json.loads(json.dumps(extra, default=str)))
    return path
