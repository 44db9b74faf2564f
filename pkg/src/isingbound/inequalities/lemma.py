"""The one-site mixing inequality in tanh coordinates.

Variables: ``theta`` in [0, pi/2] splits the weights as ``sin^2`` / ``cos^2``;
``a = tanh x``, ``b = tanh y`` with ``-1 < b <= a < 1`` are the two
magnetizations at the pivot vertex; ``c = tanh h_v`` in [0, 1).

All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from ..errors import DomainError


def _weights(theta):
    s = np.sin(theta)
    co = np.cos(theta)
    return s * s, co * co


def mobius(a, d):
    """tanh(x + H) written in ``a = tanh x``, ``d = tanh H``."""
    return (a + d) / (1.0 + a * d)


def sup_objective(theta, a, b, d):
    """``sin^2 * tanh(x + H) - cos^2 * tanh(y + H)`` as a function of ``d``."""
    wp, wm = _weights(theta)
    return wp * mobius(a, d) - wm * mobius(b, d)


def m_theta(theta, a, b):
    """Supremum of :func:`sup_objective` over ``d`` in [-1, 1].

    The derivative in ``d`` has the sign of ``A (1 + b d) - B (1 + a d)`` with
    ``A = sqrt(sin^2 (1 - a^2))`` and ``B = sqrt(cos^2 (1 - b^2))``, which is
    affine in ``d``; so the supremum sits at an endpoint or at the root of that
    affine function.
    """
    theta, a, b = np.broadcast_arrays(np.asarray(theta, float), np.asarray(a, float), np.asarray(b, float))
    wp, wm = _weights(theta)
    A = np.sqrt(wp * (1.0 - a * a))
    B = np.sqrt(wm * (1.0 - b * b))
    slope = A * b - B * a
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        d_star = np.where(slope != 0.0, (B - A) / slope, 0.0)
    d_star = np.clip(np.nan_to_num(d_star, nan=0.0), -1.0, 1.0)
    best = np.maximum(sup_objective(theta, a, b, 1.0), sup_objective(theta, a, b, -1.0))
    return np.maximum(best, sup_objective(theta, a, b, d_star))


def alpha_worst(a, b, c):
    """Mixture weight at its smallest admissible effective field."""
    return (1.0 - c) / (1.0 + 0.5 * (a - b) * c)


def lemma_objective(theta, a, b, c, m=None):
    """F(theta, a, b, c) in the factored form ``(1 - c) * {...}``; never positive."""
    if m is None:
        m = m_theta(theta, a, b)
    wp, wm = _weights(theta)
    k = 1.0 + 0.5 * (a - b) * c
    # 1 + ac and 1 - bc rewritten to avoid cancellation as |a|, |b|, c -> 1
    one_plus_ac = (1.0 + a) - a * (1.0 - c)
    one_minus_bc = (1.0 - b) + b * (1.0 - c)
    return (1.0 - c) * ((1.0 - m) / k - (wp * (1.0 - a) / one_plus_ac + wm * (1.0 + b) / one_minus_bc))


def lemma_objective_direct(theta, a, b, c, m=None):
    """F before factoring out ``1 - c``; equals :func:`lemma_objective`."""
    if m is None:
        m = m_theta(theta, a, b)
    wp, wm = _weights(theta)
    return wp * (a + c) / (1.0 + a * c) - wm * (b - c) / (1.0 - b * c) + alpha_worst(a, b, c) * (1.0 - m) - 1.0


def witness_sides(a, b, c, d):
    """Slacks ``rhs - lhs`` of the two inequalities a witness ``d`` must satisfy."""
    k = 1.0 + 0.5 * (a - b) * c
    with np.errstate(divide="ignore"):
        s1 = np.where(d >= 1.0, np.inf, (1.0 + a * d) / (1.0 - d)) - (1.0 + a * c) / k
        s2 = np.where(d <= -1.0, np.inf, (1.0 + b * d) / (1.0 + d)) - (1.0 - b * c) / k
    return s1, s2


def d_witness(a, b, c):
    """A feasible ``d`` in [-1, 1].

    When ``a + b >= 0`` the first left side is >= 1 and ``d`` in [0, 1) makes the
    first inequality tight; the second then follows because the two right
    sides add up to at least 2.  Otherwise reflect ``(a, b, d) -> (-b, -a, -d)``.
    """
    a, b, c = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    flip = (a + b) < 0
    aa = np.where(flip, -b, a)
    bb = np.where(flip, -a, b)
    L = (1.0 + aa * c) / (1.0 + 0.5 * (aa - bb) * c)
    d = (L - 1.0) / (L + aa)
    return np.where(flip, -d, d)


def check_domain(theta, a, b, c):
    theta, a, b, c = (np.asarray(x, float) for x in (theta, a, b, c))
    problems = []
    if np.any((theta < 0) | (theta > math.pi / 2)):
        problems.append("theta outside [0, pi/2]")
    if np.any((b <= -1) | (a >= 1) | (b > a)):
        problems.append("need -1 < b <= a < 1")
    if np.any((c < 0) | (c >= 1)):
        problems.append("c outside [0, 1)")
    if np.any(np.isnan(theta) | np.isnan(a) | np.isnan(b) | np.isnan(c)):
        problems.append("NaN parameter")
    if problems:
        raise DomainError("; ".join(problems))


@dataclass(frozen=True)
class LemmaPoint:
    theta: float
    a: float
    b: float
    c: float
    c_plus: float
    c_minus: float
    alpha: float
    m_theta: float
    f_value: float
    d_witness: float
    slack_first: float
    slack_second: float

    @property
    def feasible(self) -> bool:
        return min(self.slack_first, self.slack_second) >= -1e-9


def lemma_point(theta: float, a: float, b: float, c: float) -> LemmaPoint:
    check_domain(theta, a, b, c)
    wp, wm = _weights(theta)
    m = float(m_theta(theta, a, b))
    d = float(d_witness(a, b, c))
    s1, s2 = witness_sides(a, b, c, d)
    return LemmaPoint(
        theta=float(theta), a=float(a), b=float(b), c=float(c),
        c_plus=float(wp), c_minus=float(wm),
        alpha=float(alpha_worst(a, b, c)),
        m_theta=m,
        f_value=float(lemma_objective(theta, a, b, c, m)),
        d_witness=d,
        slack_first=float(s1), slack_second=float(s2),
    )


def sample_points(rng: np.random.Generator, size: int):
    """Uniform theta, (a, b) uniform on the ordered triangle, uniform c."""
    theta = rng.uniform(0.0, math.pi / 2, size)
    x = rng.uniform(-1.0, 1.0, (2, size))
    # open interval: drop the (measure-zero) endpoint -1
    x = np.where(x <= -1.0, -1.0 + 1e-12, x)
    a = x.max(axis=0)
    b = x.min(axis=0)
    c = rng.uniform(0.0, 1.0, size)
    return theta, a, b, c


@njit(cache=True)
def _obj(wp, wm, a, b, d):
    return wp * (a + d) / (1.0 + a * d) - wm * (b + d) / (1.0 + b * d)


@njit(cache=True, parallel=True)
def _grid_sup(theta, a, b, points, zoom_points, rounds):
    out = np.empty(theta.shape[0])
    for i in prange(theta.shape[0]):
        wp = math.sin(theta[i]) ** 2
        wm = math.cos(theta[i]) ** 2
        lo, hi = -1.0, 1.0
        best = -np.inf
        for r in range(rounds):
            npts = points if r == 0 else zoom_points
            step = (hi - lo) / (npts - 1)
            arg = lo
            for k in range(npts):
                d = lo + k * step
                val = _obj(wp, wm, a[i], b[i], d)
                if val > best:
                    best = val
                    arg = d
            lo = max(-1.0, arg - step)
            hi = min(1.0, arg + step)
        out[i] = best
    return out


def m_theta_grid(theta, a, b, points: int = 10_000, zoom_points: int = 64, rounds: int = 7):
    """Independent estimate of the supremum: a dense grid, then repeated
    zooms around the best grid point.  Relies only on unimodality."""
    theta, a, b = np.broadcast_arrays(np.asarray(theta, float), np.asarray(a, float), np.asarray(b, float))
    shape = theta.shape
    flat = [np.ascontiguousarray(x).ravel() for x in (theta, a, b)]
    return _grid_sup(*flat, int(points), int(zoom_points), int(rounds)).reshape(shape)


@dataclass(frozen=True)
class LemmaSweep:
    """Summary of a random sweep over the lemma's domain."""

    seed: int
    points: int
    max_f: float
    worst_f_point: tuple
    min_slack: float
    worst_slack_point: tuple
    max_factoring_gap: float
    oracle_points: int
    max_oracle_gap: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return (
            self.max_f <= self.tolerance
            and self.min_slack >= -self.tolerance
            and (self.oracle_points == 0 or self.max_oracle_gap <= 1e-8)
        )

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["worst_f_point"] = list(self.worst_f_point)
        d["worst_slack_point"] = list(self.worst_slack_point)
        d["holds"] = self.holds
        return d


def lemma_sweep(seed: int, points: int = 100_000, oracle_points: int | None = None,
                tolerance: float = 1e-9) -> LemmaSweep:
    """Evaluate F, the witness slacks and (on the first ``oracle_points``
    samples, all by default) the grid oracle for the supremum."""
    from ..seeds import child_rng

    theta, a, b, c = sample_points(child_rng(seed, "lemma"), points)
    m = m_theta(theta, a, b)
    f = lemma_objective(theta, a, b, c, m)
    f_direct = lemma_objective_direct(theta, a, b, c, m)
    s1, s2 = witness_sides(a, b, c, d_witness(a, b, c))
    slack = np.minimum(s1, s2)
    k = points if oracle_points is None else min(points, oracle_points)
    gap = float(np.max(np.abs(m_theta_grid(theta[:k], a[:k], b[:k]) - m[:k]))) if k else 0.0
    i, j = int(np.argmax(f)), int(np.argmin(slack))
    pt = lambda t: (float(theta[t]), float(a[t]), float(b[t]), float(c[t]))
    return LemmaSweep(
        int(seed), int(points), float(f[i]), pt(i), float(slack[j]), pt(j),
        float(np.max(np.abs(f - f_direct))), int(k), gap, float(tolerance),
    )
