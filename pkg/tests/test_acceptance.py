"""Exit criteria, each at its stated size and tolerance.

Every test records a one-line detail; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import io
import json
import math
import time

import numpy as np
import pytest

from isingbound import IsingGraph, IsingInstance
from isingbound.cli import run
from isingbound.report import canonical_json
from isingbound.exact import conditional_expectation, covariance, exact_stats, magnetization, mixture_alpha, reset_field
from isingbound.inequalities import (
    counterexample_path,
    counterexample_tree,
    effective_coupling_insertion_check,
    exhaustive_influence_sweep,
    fuzz_inequalities,
    lemma_sweep,
)
from isingbound.lattice import SSMQuery, fit_decay, rfim_influence, sphere_coupling, square, tv_scan

pytestmark = pytest.mark.acceptance


@pytest.mark.criterion(1, "exhaustive influence sweep, connected graphs n<=4")
def test_exhaustive_sweep(record_property):
    t = time.perf_counter()
    s = exhaustive_influence_sweep(4)
    dt = time.perf_counter() - t
    record_property("detail", f"graphs={s.graphs} checks={s.checks} min_margin={s.min_margin:.3e} time={dt:.1f}s")
    assert s.graphs == 10
    assert s.min_margin >= -1e-10
    assert dt < 120


@pytest.mark.criterion(2, "fuzz campaign, 1e4 trials of both inequalities, n<=8")
def test_fuzz_campaign(record_property):
    t = time.perf_counter()
    s = fuzz_inequalities(2026, (2, 8), 10_000, tolerance=1e-9)
    dt = time.perf_counter() - t
    record_property("detail", f"violations={s.violations} worst_theorem={s.worst_theorem_margin:.3e} "
                               f"worst_correlation={s.worst_correlation_margin:.3e} time={dt:.1f}s")
    assert s.violations == 0
    assert dt < 300


@pytest.mark.criterion(3, "mixing lemma on 1e5 random points")
def test_lemma_sweep(record_property):
    t = time.perf_counter()
    s = lemma_sweep(3, points=100_000, tolerance=1e-9)
    dt = time.perf_counter() - t
    record_property("detail", f"max_F={s.max_f:.3e} min_slack={s.min_slack:.3e} "
                               f"oracle_gap={s.max_oracle_gap:.3e} time={dt:.1f}s")
    assert s.max_f <= 1e-9
    assert s.min_slack >= -1e-9
    assert s.max_oracle_gap <= 1e-8
    assert dt < 60


@pytest.mark.criterion(4, "non-monotonicity certificates: path, tree, insertion")
def test_certificates(record_property):
    p = counterexample_path()
    t = counterexample_tree()
    ins = effective_coupling_insertion_check()
    two_tanh = 2 * math.tanh(1)
    interior_min = p.best_interior[1]
    record_property("detail", f"g1={p.g1:.10f} D(1)-D(1)*={p.d1 - interior_min:.3e} "
                               f"tree_margin@1={t.margin_at_one:.1e} tree_best={t.best_interior[1]:.3e} "
                               f"joint_diff={ins.max_abs_diff:.1e}")
    assert abs(p.d0 - two_tanh) <= 1e-9 and abs(p.d1 - two_tanh) <= 1e-9
    assert interior_min < p.d1 - 1e-4
    assert abs(t.margin_at_one) <= 1e-9
    assert t.best_interior[1] > 1e-5
    assert ins.max_abs_diff <= 1e-12


def _random_instance(rng, n):
    edges = tuple((u, v, float(rng.uniform(0, 2))) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5)
    return IsingInstance(IsingGraph(n, edges), 1.0, tuple(float(x) for x in rng.uniform(-3, 3, n)))


@pytest.mark.criterion(5, "covariance identity and mixture decomposition, 1e3 instances each")
def test_identities(record_property):
    rng = np.random.default_rng(55)
    cov_gap = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 13))
        inst = _random_instance(rng, n)
        u, v = (int(x) for x in rng.choice(n, 2, replace=False))
        pv = exact_stats(inst, [v]).marginals[v]
        rhs = 2 * pv * (1 - pv) * (conditional_expectation(inst, u, v, 1) - conditional_expectation(inst, u, v, -1))
        cov_gap = max(cov_gap, abs(covariance(inst, u, v) - rhs))
    mix_gap = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        inst = _random_instance(rng, n)
        h = np.abs(inst.field)
        v, o = (int(x) for x in rng.choice(n, 2, replace=False))
        alpha = mixture_alpha(inst.with_field(h), v)
        for sign in (1, -1):
            f = inst.with_field(sign * h)
            want = alpha * magnetization(reset_field(f, v, 0.0), o) + (1 - alpha) * magnetization(reset_field(f, v, sign * math.inf), o)
            mix_gap = max(mix_gap, abs(magnetization(f, o) - want))
    record_property("detail", f"covariance_gap={cov_gap:.2e} mixture_gap={mix_gap:.2e}")
    assert cov_gap <= 1e-10
    assert mix_gap <= 1e-10


@pytest.mark.criterion(6, "coupled chains vs exact on the N=1 box, 20 runs per beta")
def test_mc_against_exact(record_property):
    t = time.perf_counter()
    hits = {}
    for beta in (0.2, 0.35):
        ok = 0
        for run_seed in range(20):
            row = rfim_influence(2, [1], beta, "gaussian:1", sweeps=20_000, replicas=4, seed=run_seed).rows[0]
            ok += (abs(row.with_field.mean - row.exact_with_field) <= 3 * row.with_field.stderr
                   and abs(row.pure.mean - row.exact_pure) <= 3 * row.pure.stderr)
        hits[beta] = ok
    dt = time.perf_counter() - t
    record_property("detail", f"within_3se={hits} time={dt:.1f}s")
    assert all(v >= 18 for v in hits.values())
    assert dt < 600


@pytest.mark.criterion(7, "pure boundary influence decays on boxes N=1..6, d=2, beta=0.3")
def test_rfim_decay(record_property):
    res = rfim_influence(2, range(1, 7), 0.3, "zero", sweeps=20_000, replicas=4, seed=7)
    pure = [r.pure for r in res.rows]
    gaps = [(a.mean - b.mean) / math.hypot(a.stderr, b.stderr) for a, b in zip(pure, pure[1:])]
    record_property("detail", f"means={[round(e.mean, 4) for e in pure]} min_gap_in_se={min(gaps):.1f} "
                               f"r2={res.fit.r_squared:.4f} rate={res.fit.rate:.4f}")
    assert all(g > 2 for g in gaps)
    assert res.fit.r_squared >= 0.9


@pytest.mark.criterion(8, "spatial mixing on the side-9 square: monotone, dominated, log-linear")
def test_ssm_side9(record_property):
    d = square(9)
    h = np.random.default_rng(0).normal(size=d.n)
    center = [(4, 4)]
    scan = tv_scan(d, 0.3, h, center)
    mb = scan.max_by_distance()
    fit = fit_decay(list(mb), list(mb.values()))
    cache = {}
    couplings = [sphere_coupling(SSMQuery(d, 1.0, y, center, tuple(h), 0.3), cache) for y in d.boundary]
    dominated = sum(c.dominates and c.steps_ok for c in couplings)
    record_property("detail", f"max_tv_by_distance={ {k: float(f'{v:.3e}') for k, v in mb.items()} } "
                               f"dominated={dominated}/{len(couplings)} r2={fit.r_squared:.4f}")
    assert scan.monotone(1e-10)
    assert dominated == len(couplings)
    assert fit.r_squared >= 0.85


def _payloads(argv):
    out = io.StringIO()
    assert run(list(argv) + ["--threads", "1"], out) == 0
    return [canonical_json(json.loads(line)["payload"]).encode() for line in out.getvalue().splitlines()]


@pytest.mark.criterion(9, "repeated single-threaded runs give byte-identical payloads")
def test_determinism(record_property):
    runs = {
        "fuzz": ["fuzz", "--trials", "2000", "--seed", "2026"],
        "mc-vs-exact": ["rfim-decay", "--N", "1", "--beta", "0.35", "--sweeps", "4000", "--seed", "3"],
        "decay": ["rfim-decay", "--N", "1", "2", "3", "--field", "zero", "--sweeps", "2000", "--seed", "7"],
    }
    same = {k: _payloads(v) == _payloads(v) for k, v in runs.items()}
    record_property("detail", str(same))
    assert all(same.values())
