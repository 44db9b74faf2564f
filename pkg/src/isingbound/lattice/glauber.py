"""Heat-bath dynamics for two chains driven by the same uniforms.

The upper chain sees a boundary field that dominates the lower chain's
boundary field site by site.  Heat-bath acceptance is monotone in the local
field, so with shared noise the pointwise order ``lower <= upper`` survives
every update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..errors import DomainError
from .box import LatticeDomain

BATCHES = 32
BLOCK_SWEEPS = 2048


@njit(cache=True)
def _local(state, nbr, i, beta, bfield, omega_i):
    s = bfield[i]
    for k in range(nbr.shape[1]):
        j = nbr[i, k]
        if j >= 0:
            s += beta * state[j]
    return s + omega_i


@njit(cache=True)
def _prob_up(x):
    # P(spin = +1) = (1 + tanh x) / 2, with x = +-inf handled exactly
    if x == np.inf:
        return 1.0
    if x == -np.inf:
        return 0.0
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-2.0 * x))
    e = math.exp(2.0 * x)
    return e / (1.0 + e)


@njit(cache=True)
def _run_block(up, lo, nbr, beta, bf_up, bf_lo, omega, uniforms, order,
               obs, window, rb_up, rb_lo, raw_up, raw_lo, disagree):
    """Run ``uniforms.shape[0]`` sweeps; returns the number of order violations."""
    n = up.shape[0]
    violations = 0
    for t in range(uniforms.shape[0]):
        for k in range(n):
            i = order[t, k] if order.shape[0] > 0 else k
            u = uniforms[t, k]
            up[i] = 1 if u < _prob_up(_local(up, nbr, i, beta, bf_up, omega[i])) else -1
            lo[i] = 1 if u < _prob_up(_local(lo, nbr, i, beta, bf_lo, omega[i])) else -1
        for i in range(n):
            if lo[i] > up[i]:
                violations += 1
        for k in range(obs.shape[0]):
            i = obs[k]
            rb_up[t, k] = math.tanh(_local(up, nbr, i, beta, bf_up, omega[i]))
            rb_lo[t, k] = math.tanh(_local(lo, nbr, i, beta, bf_lo, omega[i]))
            raw_up[t, k] = up[i]
            raw_lo[t, k] = lo[i]
        d = False
        for k in range(window.shape[0]):
            if up[window[k]] != lo[window[k]]:
                d = True
                break
        disagree[t] = d
    return violations


@dataclass
class CoupledChains:
    """Two spin states on one domain with dominating boundary fields."""

    domain: LatticeDomain
    beta: float
    omega: np.ndarray
    bfield_upper: np.ndarray
    bfield_lower: np.ndarray
    upper: np.ndarray = None
    lower: np.ndarray = None
    sweeps: int = 0
    violations: int = 0
    random_scan: bool = False
    _rng: np.random.Generator = field(default=None, repr=False)
    last_spins: tuple = field(default=None, repr=False)

    def __post_init__(self):
        n = self.domain.n
        self.omega = np.asarray(self.omega, dtype=np.float64)
        if self.omega.shape != (n,):
            raise DomainError(f"field has length {self.omega.shape}, domain has {n} sites")
        if np.isnan(self.omega).any():
            raise DomainError("field contains NaN")
        if np.any(self.bfield_upper < self.bfield_lower):
            raise DomainError("upper boundary field must dominate the lower one")
        if self.upper is None:
            self.upper = np.ones(n, dtype=np.int64)
        if self.lower is None:
            self.lower = -np.ones(n, dtype=np.int64)
        if np.any(self.lower > self.upper):
            raise DomainError("chains must start ordered")

    @classmethod
    def plus_minus(cls, domain, beta, omega, seed, random_scan=False):
        """Chains under the all-plus and all-minus boundary, extremal starts."""
        return cls(
            domain, float(beta), omega,
            domain.boundary_field(beta, 1.0), domain.boundary_field(beta, -1.0),
            random_scan=random_scan, _rng=np.random.Generator(np.random.PCG64(seed)),
        )

    @classmethod
    def for_boundaries(cls, domain, beta, omega, tau_upper, tau_lower, seed, random_scan=False):
        return cls(
            domain, float(beta), omega,
            domain.boundary_field(beta, tau_upper), domain.boundary_field(beta, tau_lower),
            random_scan=random_scan, _rng=np.random.Generator(np.random.PCG64(seed)),
        )

    def run(self, sweeps: int, obs=(), window=()):
        """Advance ``sweeps`` sweeps; return per-sweep Rao-Blackwell values
        ``tanh(local field)`` at ``obs`` for both chains and the per-sweep
        disagreement indicator on ``window``.  The raw spins at ``obs`` are
        kept in :attr:`last_spins`."""
        if self._rng is None:
            raise DomainError("chains were built without a random stream")
        n = self.domain.n
        obs = np.asarray(obs, dtype=np.int64)
        window = np.asarray(window, dtype=np.int64)
        rb_up = np.empty((sweeps, obs.shape[0]))
        rb_lo = np.empty((sweeps, obs.shape[0]))
        raw_up = np.empty((sweeps, obs.shape[0]), dtype=np.int8)
        raw_lo = np.empty((sweeps, obs.shape[0]), dtype=np.int8)
        disagree = np.empty(sweeps, dtype=np.bool_)
        nbr = self.domain.neighbors
        done = 0
        while done < sweeps:
            m = min(BLOCK_SWEEPS, sweeps - done)
            uniforms = self._rng.random((m, n))
            if self.random_scan:
                order = self._rng.integers(0, n, (m, n))
            else:
                order = np.empty((0, n), dtype=np.int64)
            self.violations += _run_block(
                self.upper, self.lower, nbr, self.beta, self.bfield_upper, self.bfield_lower,
                self.omega, uniforms, order, obs, window,
                rb_up[done:done + m], rb_lo[done:done + m],
                raw_up[done:done + m], raw_lo[done:done + m], disagree[done:done + m],
            )
            done += m
        self.sweeps += sweeps
        self.last_spins = (raw_up, raw_lo)
        return rb_up, rb_lo, disagree


def glauber_sweep(chains: CoupledChains) -> CoupledChains:
    """One coupled heat-bath sweep."""
    chains.run(1)
    return chains


def batch_means(series: np.ndarray, batches: int = BATCHES) -> np.ndarray:
    """Drop the first half as burn-in, then average ``batches`` equal blocks."""
    kept = np.asarray(series, dtype=np.float64)[len(series) // 2:]
    size = len(kept) // batches
    if size == 0:
        raise DomainError(f"need at least {2 * batches} sweeps for {batches} batches")
    return kept[: size * batches].reshape(batches, size, *kept.shape[1:]).mean(axis=1)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    batches: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "batches": self.batches}


def pooled(batch_values) -> Estimate:
    """Mean and standard error from a stack of batch means (replicas pooled)."""
    b = np.concatenate([np.ravel(x) for x in batch_values])
    se = float(b.std(ddof=1) / math.sqrt(len(b))) if len(b) > 1 else math.inf
    return Estimate(float(b.mean()), se, int(len(b)))
