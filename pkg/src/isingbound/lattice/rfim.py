"""Boundary influence at the origin of a box, with and without a random field."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import CapacityError, DomainError
from ..exact import DEFAULT_CAP, exact_stats
from ..seeds import child_rng, child_seed
from .box import LatticeDomain, build_box
from .fit import DecayFit, fit_decay
from .glauber import BATCHES, CoupledChains, Estimate, batch_means, pooled
from .transfer import MAX_WIDTH, RectangleSolver

BETA_C = {2: 0.4406868, 3: 0.2216546}  # literature values, configuration only
Z_DOMINATION = 3.0


# ---------------------------------------------------------------- fields

def parse_field_spec(spec) -> dict:
    """Accept a dict or a short string: ``zero``, ``plus_inf``, ``gaussian:STD``,
    ``rademacher:EPS``."""
    if isinstance(spec, dict):
        out = dict(spec)
    else:
        kind, _, arg = str(spec).partition(":")
        out = {"kind": kind}
        if kind == "gaussian":
            out["std"] = float(arg or 1.0)
        elif kind == "rademacher":
            out["eps"] = float(arg or 1.0)
        elif arg:
            raise DomainError(f"field spec {spec!r} takes no argument")
    kind = out.get("kind")
    if kind not in {"zero", "plus_inf", "gaussian", "rademacher", "explicit"}:
        raise DomainError(f"unknown field kind {kind!r}")
    if kind == "gaussian" and not out.get("std", 1.0) >= 0:
        raise DomainError("gaussian std must be >= 0")
    return out


def draw_field(spec, n: int, rng: np.random.Generator) -> np.ndarray:
    spec = parse_field_spec(spec)
    kind = spec["kind"]
    if kind == "zero":
        return np.zeros(n)
    if kind == "plus_inf":
        return np.full(n, np.inf)
    if kind == "gaussian":
        return rng.normal(0.0, spec.get("std", 1.0), n)
    if kind == "rademacher":
        return spec.get("eps", 1.0) * np.where(rng.random(n) < 0.5, -1.0, 1.0)
    values = np.asarray([float(x) for x in spec["values"]])
    if values.shape != (n,):
        raise DomainError(f"explicit field has {values.size} values, box has {n} sites")
    return values


# ---------------------------------------------------------------- exact

def exact_boundary_influence(domain: LatticeDomain, beta: float, omega, site=None, method: str = "auto") -> float:
    """``<s_site>^{omega,+} - <s_site>^{omega,-}`` by enumeration or, for
    narrow 2-d rectangles, by transfer matrices."""
    site = domain.index[(0,) * domain.dim] if site is None else site
    omega = np.asarray(omega, dtype=np.float64)
    shape = domain.rectangle_shape()
    narrow = domain.dim == 2 and shape is not None and min(shape[1]) <= MAX_WIDTH
    if method == "transfer" or (method == "auto" and narrow and domain.n > 9):
        solver = RectangleSolver(domain, beta)
        m = lambda tau: solver.magnetizations(omega + domain.boundary_field(beta, tau))[site]
        return float(m(1.0) - m(-1.0))
    if domain.n <= DEFAULT_CAP:
        m = lambda tau: exact_stats(domain.to_instance(beta, omega, tau), [site]).magnetizations[site]
        return float(m(1.0) - m(-1.0))
    raise CapacityError(f"no exact method for {domain.n} sites in dimension {domain.dim}")


# ---------------------------------------------------------------- MC

def _replica(args):
    dim, N, beta, omega, seed, sweeps, random_scan = args
    domain = build_box(dim, N)
    site = domain.index[(0,) * dim]
    chains = CoupledChains.plus_minus(domain, beta, omega, seed, random_scan)
    up, lo, _ = chains.run(sweeps, obs=[site])
    diff = (up - lo)[:, 0]
    return batch_means(diff), batch_means(up[:, 0]), batch_means(lo[:, 0]), chains.violations


def coupled_influence(dim, N, beta, omega, seed, sweeps, replicas, threads=1, random_scan=False):
    """Estimate of the boundary influence at the origin from coupled chains.

    Returns ``(difference, plus, minus, per_replica, violations)``.
    """
    jobs = [(dim, N, beta, np.asarray(omega, float), child_seed(seed, f"chain-N{N}", r), sweeps, random_scan)
            for r in range(replicas)]
    if threads > 1 and replicas > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(_replica, jobs))
    else:
        out = [_replica(j) for j in jobs]
    per_replica = [pooled([o[0]]) for o in out]
    return (
        pooled([o[0] for o in out]), pooled([o[1] for o in out]), pooled([o[2] for o in out]),
        per_replica, sum(o[3] for o in out),
    )


@dataclass
class InfluenceRow:
    N: int
    field: list
    with_field: Estimate
    pure: Estimate
    exact_with_field: float | None = None
    exact_pure: float | None = None
    replicas_with_field: list = field(default_factory=list)
    replicas_pure: list = field(default_factory=list)
    violations: int = 0

    @property
    def excess(self) -> float:
        return self.with_field.mean - self.pure.mean

    @property
    def excess_stderr(self) -> float:
        return math.hypot(self.with_field.stderr, self.pure.stderr)

    @property
    def dominated(self) -> bool:
        return self.excess <= Z_DOMINATION * self.excess_stderr

    def to_dict(self) -> dict:
        enc = lambda x: x if math.isfinite(x) else ("+inf" if x > 0 else "-inf")
        return {
            "N": self.N,
            "field": [enc(float(x)) for x in self.field],
            "with_field": self.with_field.to_dict(),
            "pure": self.pure.to_dict(),
            "exact_with_field": self.exact_with_field,
            "exact_pure": self.exact_pure,
            "excess": self.excess, "excess_stderr": self.excess_stderr,
            "dominated": self.dominated,
            "replicas_with_field": [e.to_dict() for e in self.replicas_with_field],
            "replicas_pure": [e.to_dict() for e in self.replicas_pure],
            "order_violations": self.violations,
        }


@dataclass
class RFIMResult:
    dim: int
    beta: float
    field_spec: dict
    sweeps: int
    replicas: int
    seed: int
    scan: str
    rows: list
    fit: DecayFit | None

    def to_dict(self) -> dict:
        return {
            "dim": self.dim, "beta": self.beta, "field_spec": self.field_spec,
            "sweeps": self.sweeps, "burn_in": self.sweeps // 2, "batches": BATCHES,
            "replicas": self.replicas, "seed": self.seed, "scan": self.scan,
            "rows": [r.to_dict() for r in self.rows],
            "fit": None if self.fit is None else self.fit.to_dict(),
        }


def rfim_influence(dim, N_list, beta, field_spec="gaussian:1", sweeps=20_000, replicas=4, seed=0,
                   threads=1, exact=True, random_scan=False) -> RFIMResult:
    """Both sides of the random-field domination at each ``N``, and a decay fit
    of the field-free side over ``N_list``.

    One field realization is drawn per ``N``.  The field-free and random-field
    runs share their random streams, so with ``omega = 0`` they coincide.
    """
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    if sweeps < 2 * BATCHES:
        raise DomainError(f"sweeps must be at least {2 * BATCHES}")
    spec = parse_field_spec(field_spec)
    rows = []
    for N in N_list:
        domain = build_box(dim, int(N))
        omega = draw_field(spec, domain.n, child_rng(seed, "field", int(N)))
        wf, _, _, rep_wf, v1 = coupled_influence(dim, N, beta, omega, seed, sweeps, replicas, threads, random_scan)
        pure, _, _, rep_p, v2 = coupled_influence(dim, N, beta, np.zeros(domain.n), seed, sweeps, replicas, threads, random_scan)
        row = InfluenceRow(int(N), omega.tolist(), wf, pure, replicas_with_field=rep_wf, replicas_pure=rep_p, violations=v1 + v2)
        if exact:
            try:
                row.exact_with_field = exact_boundary_influence(domain, beta, omega)
                row.exact_pure = exact_boundary_influence(domain, beta, np.zeros(domain.n))
            except CapacityError:
                pass
        rows.append(row)
    fit = None
    if len(rows) >= 2:
        try:
            fit = fit_decay([r.N for r in rows], [r.pure.mean for r in rows], [r.pure.stderr for r in rows])
        except DomainError:
            fit = None
    return RFIMResult(dim, float(beta), spec, int(sweeps), int(replicas), int(seed),
                      "random" if random_scan else "systematic", rows, fit)
