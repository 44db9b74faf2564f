"""Checkers for the boundary-influence inequality and its corollaries."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from ..core import IsingGraph, IsingInstance, as_extended
from ..errors import DomainError
from ..exact import covariance, exact_stats
from ..exact.dense import batch_magnetizations
from .reports import DEFAULT_TOL, InequalityReport, digest


def shift_field(g: Sequence[float], h: Sequence[float], sign: int) -> list:
    """``g + sign * h`` in the extended reals, assuming min(|g_v|, h_v) < inf."""
    out = []
    for gv, hv in zip(g, h):
        if math.isinf(gv):
            out.append(gv)
        elif math.isinf(hv):
            out.append(sign * math.inf)
        else:
            out.append(gv + sign * hv)
    return out


def validate_influence_query(instance: IsingInstance, h: Sequence, o: int) -> list:
    h = [as_extended(x) for x in h]
    if len(h) != instance.n:
        raise DomainError(f"h has {len(h)} entries, instance has {instance.n} vertices")
    if not 0 <= o < instance.n:
        raise DomainError(f"target vertex {o} is not in the instance")
    for v, (gv, hv) in enumerate(zip(instance.field, h)):
        if hv < 0:
            raise DomainError(f"h_{v} = {hv} is negative")
        if math.isinf(gv) and math.isinf(hv):
            raise DomainError(f"min(|g_{v}|, h_{v}) is infinite; the inequality is undefined there")
    return h


def influence_sides(instance: IsingInstance, h: Sequence, o: int, **kw) -> tuple[float, float]:
    """(<s_o>_{g+h} - <s_o>_{g-h},  <s_o>_h - <s_o>_{-h})."""
    h = validate_influence_query(instance, h, o)
    g = instance.field
    zeros = [0.0] * instance.n

    def mag(field):
        return exact_stats(instance.with_field(field), [o], **kw).magnetizations[o]

    lhs = mag(shift_field(g, h, 1)) - mag(shift_field(g, h, -1))
    rhs = mag(shift_field(zeros, h, 1)) - mag(shift_field(zeros, h, -1))
    return lhs, rhs


def check_boundary_influence(
    instance: IsingInstance, h: Sequence, o: int, tolerance: float = DEFAULT_TOL, **kw
) -> InequalityReport:
    """Compare the influence of ``h`` on ``s_o`` under field ``g`` with that under zero field."""
    lhs, rhs = influence_sides(instance, h, o, **kw)
    key = {"instance": instance.to_dict(), "h": list(h), "o": o}
    return InequalityReport("boundary-influence", lhs, rhs, tolerance, digest(key))


def check_boundary_condition_influence(
    instance: IsingInstance, boundary: Iterable[int], o: int, tolerance: float = DEFAULT_TOL, **kw
) -> InequalityReport:
    """Plus-vs-minus boundary on ``boundary`` with interior field ``g`` versus interior field 0."""
    boundary = sorted(set(int(v) for v in boundary))
    if o in boundary:
        raise DomainError(f"target vertex {o} lies in the boundary set")
    g = list(instance.field)
    for v in range(instance.n):
        if v not in boundary and math.isinf(g[v]):
            raise DomainError(f"interior vertex {v} has an infinite field")
    h = [0.0] * instance.n
    for v in boundary:
        g[v] = 0.0
        h[v] = math.inf
    report = check_boundary_influence(instance.with_field(g), h, o, tolerance, **kw)
    return InequalityReport("boundary-condition-influence", report.lhs, report.rhs, tolerance, report.instance_digest)


def check_correlation(
    instance: IsingInstance, u: int, v: int, tolerance: float = DEFAULT_TOL, **kw
) -> InequalityReport:
    """Truncated correlation under ``g`` against the zero-field correlation."""
    if u == v:
        raise DomainError("check_correlation needs u != v")
    lhs = covariance(instance, u, v, **kw)
    free = instance.with_field([0.0] * instance.n)
    rhs = exact_stats(free, [], pairs=[(u, v)], **kw).pair_products[(u, v)]
    key = {"instance": instance.to_dict(), "u": u, "v": v}
    return InequalityReport("correlation", lhs, rhs, tolerance, digest(key))


def single_spin_gap(g, h):
    """``tanh(g + h) - tanh(g - h)``; even in ``g`` and largest at ``g = 0``."""
    return np.tanh(np.add(g, h)) - np.tanh(np.subtract(g, h))


@dataclass(frozen=True)
class GHSScan:
    lambdas: tuple
    covariances: tuple
    max_increase: float
    tolerance: float

    @property
    def monotone(self) -> bool:
        return self.max_increase <= self.tolerance


def ghs_monotonicity_scan(
    instance: IsingInstance,
    g_tilde: Sequence[float],
    u: int,
    v: int,
    lambda_grid: Sequence[float],
    tolerance: float = 1e-12,
    validate: bool = True,
    **kw,
) -> GHSScan:
    """Scan ``lam -> cov_{lam * g_tilde}(s_u, s_v)`` for monotone decrease.

    Monotonicity is only claimed for ``g_tilde >= 0``; ``validate=False``
    lifts that check so mixed-sign fields can be explored.
    """
    g_tilde = [as_extended(x) for x in g_tilde]
    if validate:
        bad = [w for w, x in enumerate(g_tilde) if x < 0 or math.isinf(x)]
        if bad:
            raise DomainError(f"g_tilde must be finite and nonnegative; offending vertices {bad}")
    grid = [float(x) for x in lambda_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("lambda_grid must be ascending")
    covs = []
    for lam in grid:
        field = [0.0 if lam == 0 else lam * x for x in g_tilde]
        covs.append(covariance(instance.with_field(field), u, v, **kw))
    incr = max((b - a for a, b in zip(covs, covs[1:])), default=0.0)
    return GHSScan(tuple(grid), tuple(covs), float(incr), tolerance)


# ---------------------------------------------------------------- exhaustive sweep

@dataclass
class ExhaustiveSweep:
    graphs: int
    checks: int
    min_margin: float
    worst: dict

    def holds(self, tolerance: float = 1e-10) -> bool:
        return self.min_margin >= -tolerance

    def to_dict(self) -> dict:
        return {"graphs": self.graphs, "checks": self.checks, "min_margin": self.min_margin, "worst": self.worst}


def exhaustive_influence_sweep(
    max_n: int = 4,
    couplings: Sequence[float] = (0.5, 1.5),
    g_values: Sequence[float] = (-2.0, -0.5, 0.0, 0.5, 2.0),
    h_values: Sequence[float] = (0.0, 1.0, math.inf),
) -> ExhaustiveSweep:
    """Every connected graph on at most ``max_n`` vertices (up to isomorphism),
    every coupling and field assignment from the grids, every target.

    Each coupling assignment is solved once for all (g, h) pairs with the
    dense batch solver; pairs with an infinite ``g`` and ``h`` at the same
    vertex are skipped.
    """
    graphs = [G for G in nx.graph_atlas_g() if 0 < G.number_of_nodes() <= max_n and nx.is_connected(G)]
    best = math.inf
    worst: dict = {}
    checks = 0
    for G in graphs:
        n = G.number_of_nodes()
        edges = sorted(G.edges())
        g = np.array(list(itertools.product(g_values, repeat=n)), dtype=np.float64)
        h = np.array(list(itertools.product(h_values, repeat=n)), dtype=np.float64)
        gg = np.repeat(g, len(h), axis=0)
        hh = np.tile(h, (len(g), 1))
        ok = ~(np.isinf(gg) & np.isinf(hh)).any(axis=1)
        gg, hh = gg[ok], hh[ok]
        with np.errstate(invalid="ignore"):
            plus = np.where(np.isinf(gg), gg, gg + hh)
            minus = np.where(np.isinf(gg), gg, gg - hh)
        hidx = np.tile(np.arange(len(h)), len(g))[ok]
        for Js in itertools.product(couplings, repeat=len(edges)):
            graph = IsingGraph(n, tuple((u, v, J) for (u, v), J in zip(edges, Js)))
            lhs = batch_magnetizations(graph, 1.0, plus) - batch_magnetizations(graph, 1.0, minus)
            rhs = batch_magnetizations(graph, 1.0, h) - batch_magnetizations(graph, 1.0, -h)
            margin = rhs[hidx] - lhs
            checks += margin.size
            k = np.unravel_index(int(np.argmin(margin)), margin.shape)
            if margin[k] < best:
                best = float(margin[k])
                worst = {"n": n, "edges": [[u, v, J] for (u, v), J in zip(edges, Js)],
                         "g": gg[k[0]].tolist(), "h": hh[k[0]].tolist(), "o": int(k[1])}
    return ExhaustiveSweep(len(graphs), checks, best, worst)
