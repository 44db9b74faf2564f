"""Exact moments of small Ising instances by full enumeration."""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..core import IsingInstance, reduce_infinite_fields
from ..errors import CapacityError, DomainError, ImpossibleEventError
from . import _kernels

DEFAULT_CAP = 26
CHUNK_BITS = 16
# Below this many surviving spins the single-threaded kernel is used.
PARALLEL_MIN_SPINS = 20


class DegenerateMixtureWarning(UserWarning):
    """``mixture_alpha`` was asked for a vertex with zero field."""


@dataclass(frozen=True)
class ExactStats:
    """Results of one enumeration pass.

    ``log_z`` is the log partition function over configurations consistent
    with every pinned spin; infinite field terms are dropped from the
    exponent, finite ones are kept.
    """

    log_z: float
    magnetizations: Mapping = field(default_factory=dict)
    pair_products: Mapping = field(default_factory=dict)
    marginals: Mapping = field(default_factory=dict)
    conditionals: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class EffectiveFieldResult:
    vertex: int
    lam: float
    log_z_plus: float
    log_z_minus: float

    @property
    def lambda_(self) -> float:
        return self.lam


def _threads(threads):
    if threads is None:
        threads = int(os.environ.get("ISINGBOUND_THREADS", "1") or 1)
    return max(1, int(threads))


def _enumerate(inst: IsingInstance, qv: Sequence[int], qp: Sequence[tuple], cap: int, threads=None):
    """Return (log Z, P(s_v=+1) per qv, P(s_u=s_v) per qp) for an all-finite instance."""
    n = inst.n
    if n > cap:
        raise CapacityError(
            f"{n} free spins exceed the enumeration cap of {cap}; "
            "raise the cap or use the Monte Carlo commands"
        )
    if n == 0:
        return 0.0, np.zeros(0), np.ones(len(qp))
    indptr, indices, weights = inst.graph.csr(inst.beta)
    fld = np.asarray(inst.field, dtype=np.float64)
    qv_arr = np.asarray(qv, dtype=np.int64).reshape(-1)
    qp_arr = np.asarray(qp, dtype=np.int64).reshape(-1, 2)
    nthreads = _threads(threads)
    if n >= PARALLEL_MIN_SPINS and nthreads > 1:
        import numba

        numba.set_num_threads(min(nthreads, numba.config.NUMBA_NUM_THREADS))
        parts = _kernels.enumerate_parallel(n, fld, indptr, indices, weights, qv_arr, qp_arr, CHUNK_BITS)
    else:
        parts = _kernels.enumerate_serial(n, fld, indptr, indices, weights, qv_arr, qp_arr, CHUNK_BITS)
    return _kernels.merge_chunks(*parts)


def exact_stats(
    instance: IsingInstance,
    vertices: Iterable[int] | None = None,
    pairs: Iterable[tuple] = (),
    conditionals: Iterable[tuple] = (),
    clamps: Mapping | None = None,
    cap: int = DEFAULT_CAP,
    threads: int | None = None,
) -> ExactStats:
    """Compute log Z and the requested moments in one enumeration.

    ``vertices`` defaults to all vertices.  ``conditionals`` is a list of
    ``(o, v, s)`` triples asking for ``<s_o | s_v = s>``.  ``clamps`` pins
    spins in addition to the infinite fields (finite field terms of clamped
    vertices stay in ``log_z``).
    """
    red = reduce_infinite_fields(instance, clamps)
    if vertices is None:
        vertices = range(instance.n)
    vertices = [int(v) for v in vertices]
    pairs = [(int(u), int(v)) for u, v in pairs]
    conditionals = [(int(o), int(v), int(s)) for o, v, s in conditionals]
    for v in vertices + [w for p in pairs for w in p] + [w for c in conditionals for w in c[:2]]:
        if not 0 <= v < instance.n:
            raise DomainError(f"vertex {v} is not in the instance")

    needed_v = set(vertices)
    needed_p = set()
    for u, v in pairs:
        needed_p.add((min(u, v), max(u, v)))
    for o, v, _ in conditionals:
        needed_v.update((o, v))
        if o != v:
            needed_p.add((min(o, v), max(o, v)))

    vmap, fixed = red.vertex_map, red.fixed_spins
    free_v = sorted(v for v in needed_v if v not in fixed)
    free_p = sorted(p for p in needed_p if p[0] not in fixed and p[1] not in fixed and p[0] != p[1])
    log_z, plus, same = _enumerate(
        red.instance, [vmap[v] for v in free_v], [(vmap[u], vmap[v]) for u, v in free_p], cap, threads
    )
    log_z += red.offset

    prob_plus = {v: float(p) for v, p in zip(free_v, plus)}
    for v in needed_v:
        if v in fixed:
            prob_plus[v] = 1.0 if fixed[v] > 0 else 0.0
    mag = {v: 2.0 * prob_plus[v] - 1.0 for v in needed_v}

    pair_val = {p: 2.0 * float(q) - 1.0 for p, q in zip(free_p, same)}
    for u, v in needed_p:
        if (u, v) in pair_val:
            continue
        if u == v:
            pair_val[(u, v)] = 1.0
        elif u in fixed and v in fixed:
            pair_val[(u, v)] = float(fixed[u] * fixed[v])
        elif u in fixed:
            pair_val[(u, v)] = fixed[u] * mag[v]
        else:
            pair_val[(u, v)] = fixed[v] * mag[u]

    def pv(u, v):
        return 1.0 if u == v else pair_val[(min(u, v), max(u, v))]

    cond = {}
    for o, v, s in conditionals:
        if s not in (1, -1):
            raise DomainError(f"conditioning value must be +1 or -1, got {s}")
        p_event = prob_plus[v] if s > 0 else 1.0 - prob_plus[v]
        if p_event <= 0.0:
            raise ImpossibleEventError(f"P(s_{v} = {s:+d}) = 0")
        # <s_o 1{s_v = s}> = (<s_o> + s <s_o s_v>) / 2
        cond[(o, v, s)] = (mag[o] + s * pv(o, v)) / (2.0 * p_event)

    return ExactStats(
        log_z=float(log_z),
        magnetizations={v: mag[v] for v in vertices},
        pair_products={(u, v): pv(u, v) for u, v in pairs},
        marginals={v: prob_plus[v] for v in vertices},
        conditionals=cond,
    )


def magnetization(instance: IsingInstance, o: int, **kw) -> float:
    return exact_stats(instance, [o], **kw).magnetizations[o]


def log_partition(instance: IsingInstance, clamps: Mapping | None = None, **kw) -> float:
    return exact_stats(instance, [], clamps=clamps, **kw).log_z


def conditional_expectation(
    instance: IsingInstance, o: int, v: int, s: int, method: str = "clamp", **kw
) -> float:
    """``<s_o | s_v = s>``.

    ``method="clamp"`` pins ``s_v`` and reads the magnetization of ``o`` in
    the reduced instance; ``method="restrict"`` uses the joint moments of a
    single unrestricted pass.  Both must agree.
    """
    if s not in (1, -1):
        raise DomainError(f"conditioning value must be +1 or -1, got {s}")
    if method == "clamp":
        return exact_stats(instance, [o], clamps={v: s}, **kw).magnetizations[o]
    if method == "restrict":
        g_v = instance.field[v]
        if math.isinf(g_v) and (g_v > 0) != (s > 0):
            raise ImpossibleEventError(f"vertex {v} is pinned to the opposite sign")
        return exact_stats(instance, [], conditionals=[(o, v, s)], **kw).conditionals[(o, v, s)]
    raise ValueError(f"unknown method {method!r}")


def covariance(instance: IsingInstance, u: int, v: int, **kw) -> float:
    """Truncated two-point function ``<s_u s_v> - <s_u><s_v>``."""
    if u == v:
        raise DomainError("covariance needs two distinct vertices; use the magnetization for a variance")
    if math.isinf(instance.field[u]) or math.isinf(instance.field[v]):
        return 0.0
    st = exact_stats(instance, [u, v], pairs=[(u, v)], **kw)
    return st.pair_products[(u, v)] - st.magnetizations[u] * st.magnetizations[v]


def effective_field(instance: IsingInstance, o: int, **kw) -> EffectiveFieldResult:
    """Field that the rest of the system exerts on ``o``, with ``g_o`` set to 0.

    ``lam = (log Z[s_o=+1] - log Z[s_o=-1]) / 2`` so that
    ``<s_o> = tanh(lam + g_o)`` for finite ``g_o``.
    """
    if math.isinf(instance.field[o]):
        raise DomainError(f"vertex {o} has an infinite field; its effective field is undefined")
    g = list(instance.field)
    g[o] = 0.0
    tilde = instance.with_field(g)
    lz_p = log_partition(tilde, clamps={o: 1}, **kw)
    lz_m = log_partition(tilde, clamps={o: -1}, **kw)
    return EffectiveFieldResult(o, 0.5 * (lz_p - lz_m), lz_p, lz_m)


def mixture_alpha(instance: IsingInstance, v: int, **kw) -> float:
    """Weight of the zero-field law in the mixture representation at ``v``.

    The instance field plays the role of ``h >= 0``.  Solves
    ``<s_v>_h = alpha <s_v>_h^(0) + (1 - alpha)`` in the closed form
    ``(1 - tanh(z + h_v)) / (1 - tanh z)``, with ``z`` the effective field at
    ``v`` when ``h_v`` is reset to 0.
    """
    h = instance.field
    if any(x < 0 for x in h):
        raise DomainError("mixture_alpha needs a nonnegative field")
    hv = h[v]
    if hv == math.inf:
        return 0.0
    if hv == 0:
        warnings.warn(f"h_{v} = 0: the mixture is degenerate, returning alpha = 1", DegenerateMixtureWarning)
        return 1.0
    z = effective_field(instance, v, **kw).lam
    # 1 - tanh x = 2 / (1 + exp(2x)); ratio taken in log space
    return float(math.exp(np.logaddexp(0.0, 2.0 * z) - np.logaddexp(0.0, 2.0 * (z + hv))))


def reset_field(instance: IsingInstance, v: int, value: float) -> IsingInstance:
    """Copy of ``instance`` with the field at ``v`` replaced."""
    g = list(instance.field)
    g[v] = value
    return instance.with_field(g)
