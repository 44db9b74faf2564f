"""Explicit instances where the natural monotonicity-in-lambda conjectures fail."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from ..core import IsingGraph, IsingInstance, build_instance
from ..errors import ConstructionError
from ..exact import edge_message, exact_stats
from .theorem import check_correlation

GRID_POINTS = 101
PATH_DELTA = 1e-4
TREE_DELTA = 1e-5
DEFAULT_G2 = 3.0
DEFAULT_J_UA = 0.9


def lambda_grid(points: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def _scaled(g, lam):
    # 0 * inf is taken as 0: at lam = 0 the field vanishes everywhere
    return [0.0 if lam == 0 else lam * x for x in g]


# ---------------------------------------------------------------- path

PATH_LABELS = (-2, -1, 0, 1, 2)
PATH_TARGET = 2  # index of vertex 0


def path_balance(g1: float, g2: float, lam: float = 1.0) -> float:
    """Net effective field on the middle spin of the 5-path at scale ``lam``."""
    left = edge_message(1.0, lam * -2.0 + edge_message(1.0, lam * -2.0))
    right = edge_message(1.0, lam * g1 + edge_message(1.0, lam * g2))
    return left + right


@dataclass(frozen=True)
class PathCertificate:
    g1: float
    g2: float
    instance: IsingInstance
    lambdas: tuple
    gaps: tuple
    bracket: tuple
    delta: float = PATH_DELTA

    @property
    def target(self) -> float:
        return 2.0 * math.tanh(1.0)

    @property
    def d0(self) -> float:
        return self.gaps[0]

    @property
    def d1(self) -> float:
        return self.gaps[-1]

    @property
    def best_interior(self) -> tuple:
        k = int(np.argmin(self.gaps[1:-1])) + 1
        return self.lambdas[k], self.gaps[k]

    @property
    def drop(self) -> float:
        return self.d1 - self.best_interior[1]

    @property
    def certified(self) -> bool:
        return (
            abs(self.d0 - self.target) <= 1e-9
            and abs(self.d1 - self.target) <= 1e-9
            and self.drop > self.delta
        )

    def to_dict(self) -> dict:
        lam, val = self.best_interior
        return {
            "g1": self.g1, "g2": self.g2, "bracket": list(self.bracket),
            "field": list(self.instance.field),
            "D0": self.d0, "D1": self.d1, "target": self.target,
            "best_lambda": lam, "best_D": val, "drop": self.drop, "delta": self.delta,
            "certified": self.certified,
            "table": [[l, d] for l, d in zip(self.lambdas, self.gaps)],
        }


def path_gap(instance: IsingInstance, lam: float, o: int = PATH_TARGET) -> float:
    """``<s_o>_{lam g + h} - <s_o>_{lam g - h}`` with ``h`` = 1 at ``o``."""
    g = _scaled(instance.field, lam)
    plus, minus = list(g), list(g)
    plus[o] += 1.0
    minus[o] -= 1.0
    m = lambda f: exact_stats(instance.with_field(f), [o]).magnetizations[o]
    return m(plus) - m(minus)


def counterexample_path(g2: float = DEFAULT_G2, points: int = GRID_POINTS) -> PathCertificate:
    """Balance the 5-path so the middle spin feels no net field, then scan lambda."""
    lo, hi = -40.0, 2.0
    f = lambda g1: path_balance(g1, g2)
    if not g2 > 2.0:
        raise ConstructionError(f"need g2 > 2, got {g2}")
    if f(lo) * f(hi) > 0:
        raise ConstructionError(f"balance not bracketed on [{lo}, {hi}] for g2 = {g2}")
    g1 = bisect(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)
    if not g1 < 2.0:
        raise ConstructionError(f"solved g1 = {g1} is not below 2")
    instance = build_instance(IsingGraph.path(5), 1.0, [-2.0, -2.0, 0.0, g1, g2])
    lams = lambda_grid(points)
    gaps = tuple(path_gap(instance, float(l)) for l in lams)
    return PathCertificate(g1, g2, instance, tuple(float(l) for l in lams), gaps, (lo, hi))


# ---------------------------------------------------------------- tree

TREE_U, TREE_V, TREE_A, TREE_B = 0, 1, 2, 3


def tree_instance(j_ua: float, g_a: float, inserted: bool = False) -> IsingInstance:
    """Root u with leaves v, a, b (indices 0..3); with ``inserted`` an extra
    vertex 4 sits between u and a and every coupling is 1."""
    if inserted:
        edges = ((0, 1, 1.0), (0, 4, 1.0), (4, 2, 1.0), (0, 3, 1.0))
        return build_instance(IsingGraph(5, edges), 1.0, [0.0, 0.0, g_a, 1.0, 0.0])
    edges = ((0, 1, 1.0), (0, 2, j_ua), (0, 3, 1.0))
    return build_instance(IsingGraph(4, edges), 1.0, [0.0, 0.0, g_a, 1.0])


def effective_coupling(J1: float = 1.0, J2: float = 1.0) -> float:
    """Coupling of a two-edge chain after summing out the free middle spin."""
    return math.atanh(math.tanh(J1) * math.tanh(J2))


def solve_tree_field(j_ua: float) -> float:
    """Field on ``a`` whose effective field on ``u`` cancels that of ``b``.

    When ``tanh j_ua == tanh(1)**2`` the balance needs ``g_a = -inf``.
    """
    if not 0.0 < j_ua < 1.0:
        raise ConstructionError(f"j_ua must lie in (0, 1), got {j_ua}")
    pull_b = edge_message(1.0, 1.0)
    need = -math.tanh(pull_b) / math.tanh(j_ua)
    if abs(need + 1.0) <= 1e-12:
        return -math.inf
    if need < -1.0:
        raise ConstructionError(
            f"j_ua = {j_ua} is too weak: no field on a balances b (needs tanh g_a = {need:.6g})"
        )
    lo, hi = -40.0, -1.0
    f = lambda ga: edge_message(j_ua, ga) + pull_b
    if f(lo) * f(hi) > 0:
        raise ConstructionError(f"no root in ({lo}, {hi}) for j_ua = {j_ua}")
    return bisect(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)


@dataclass(frozen=True)
class TreeCertificate:
    j_ua: float
    g_a: float
    inserted: bool
    instance: IsingInstance
    lambdas: tuple
    covariances: tuple
    margins: tuple
    delta: float = TREE_DELTA

    @property
    def margin_at_one(self) -> float:
        return self.margins[-1]

    @property
    def best_interior(self) -> tuple:
        k = int(np.argmax(self.margins[1:-1])) + 1
        return self.lambdas[k], self.margins[k]

    @property
    def non_monotone(self) -> bool:
        return any(b > a + 1e-12 for a, b in zip(self.covariances, self.covariances[1:]))

    @property
    def certified(self) -> bool:
        return abs(self.margin_at_one) <= 1e-9 and self.best_interior[1] > self.delta and self.non_monotone

    def to_dict(self) -> dict:
        lam, val = self.best_interior
        return {
            "j_ua": self.j_ua, "g_a": self.g_a if math.isfinite(self.g_a) else "-inf",
            "inserted": self.inserted,
            "margin_at_one": self.margin_at_one, "best_lambda": lam, "best_margin": val,
            "delta": self.delta, "non_monotone": self.non_monotone, "certified": self.certified,
            "table": [[l, c, m] for l, c, m in zip(self.lambdas, self.covariances, self.margins)],
        }


def counterexample_tree(j_ua: float = DEFAULT_J_UA, inserted: bool = False, points: int = GRID_POINTS) -> TreeCertificate:
    """Covariance of (u, v) under ``lam * g_tilde`` is not monotone in ``lam``."""
    if inserted:
        j_ua = effective_coupling()
    g_a = solve_tree_field(j_ua)
    base = tree_instance(j_ua, g_a, inserted)
    lams = lambda_grid(points)
    covs, margins = [], []
    for lam in lams:
        rep = check_correlation(base.with_field(_scaled(base.field, float(lam))), TREE_U, TREE_V)
        covs.append(rep.lhs)
        margins.append(rep.margin)
    return TreeCertificate(j_ua, g_a, inserted, base, tuple(float(l) for l in lams), tuple(covs), tuple(margins))


@dataclass(frozen=True)
class InsertionCheck:
    coupling: float
    joint_chain: dict
    joint_edge: dict
    max_abs_diff: float
    tree: TreeCertificate | None = None

    @property
    def ok(self) -> bool:
        return self.max_abs_diff <= 1e-12 and 0.0 < self.coupling < 1.0


def _joint(instance: IsingInstance, u: int, a: int) -> dict:
    st = exact_stats(instance, [u, a], pairs=[(u, a)])
    mu, ma, ch = st.magnetizations[u], st.magnetizations[a], st.pair_products[(u, a)]
    return {
        (su, sa): (1.0 + su * mu + sa * ma + su * sa * ch) / 4.0
        for su in (1, -1) for sa in (1, -1)
    }


def effective_coupling_insertion_check(with_tree: bool = True) -> InsertionCheck:
    """The chain u - a~ - a with unit couplings and zero field has the same
    (s_u, s_a) law as a single edge of strength ``log(cosh 2) / 2``."""
    jstar = 0.5 * math.log(math.cosh(2.0))
    chain = build_instance(IsingGraph.path(3), 1.0, [0.0, 0.0, 0.0])
    edge = build_instance(IsingGraph(2, ((0, 1, jstar),)), 1.0, [0.0, 0.0])
    pc, pe = _joint(chain, 0, 2), _joint(edge, 0, 1)
    diff = max(abs(pc[k] - pe[k]) for k in pc)
    tree = counterexample_tree(inserted=True) if with_tree else None
    key = lambda d: {f"{s:+d}{t:+d}": p for (s, t), p in d.items()}
    return InsertionCheck(jstar, key(pc), key(pe), diff, tree)
