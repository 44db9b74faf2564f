"""Graphs, extended-real fields and Ising instances.

The Gibbs weight of a configuration ``sigma`` is

    exp(beta * sum_{uv} J_uv s_u s_v + sum_u g_u s_u)

i.e. the field is *not* multiplied by ``beta``.  A field of ``+inf`` or
``-inf`` pins the spin; :func:`reduce_infinite_fields` removes pinned
vertices and pushes ``+-beta * J_uv`` onto their neighbours.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ImpossibleEventError, ValidationError

INF = math.inf


def as_extended(value) -> float:
    """Parse one extended-real field value.

    Accepts finite numbers, ``math.inf``/``-math.inf`` and the strings
    ``"+inf"``, ``"inf"``, ``"-inf"``.  NaN is rejected.
    """
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("+inf", "inf", "+infinity", "infinity"):
            return INF
        if text in ("-inf", "-infinity"):
            return -INF
        try:
            value = float(text)
        except ValueError:
            raise ValidationError(f"cannot parse field value {value!r}") from None
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"cannot parse field value {value!r}") from None
    if math.isnan(x):
        raise ValidationError("field value is NaN")
    return x


def extended_to_json(x: float):
    if x == INF:
        return "+inf"
    if x == -INF:
        return "-inf"
    return x


@dataclass(frozen=True)
class IsingGraph:
    """Undirected simple graph with nonnegative couplings.

    ``edges`` holds ``(u, v, J)`` triples with ``u < v`` after construction.
    """

    vertex_count: int
    edges: tuple = ()

    def __post_init__(self):
        n = self.vertex_count
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 0:
            raise ValidationError(f"vertex_count must be a nonnegative integer, got {n!r}")
        object.__setattr__(self, "vertex_count", int(n))
        seen = set()
        normalized = []
        for k, edge in enumerate(self.edges):
            try:
                u, v, J = edge
            except (TypeError, ValueError):
                raise ValidationError(f"edge #{k} is not a (u, v, J) triple: {edge!r}") from None
            u, v = int(u), int(v)
            J = float(J)
            if u == v:
                raise ValidationError(f"self-loop at vertex {u} (edge #{k})")
            for w in (u, v):
                if not 0 <= w < n:
                    raise ValidationError(f"edge #{k} ({u}, {v}) references vertex {w} outside 0..{n - 1}")
            if not math.isfinite(J):
                raise ValidationError(f"non-finite coupling {J} on edge ({u}, {v})")
            if J < 0:
                raise ValidationError(f"negative coupling {J} on edge ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}; merge multi-edges by summing J")
            seen.add(key)
            normalized.append((key[0], key[1], J))
        object.__setattr__(self, "edges", tuple(normalized))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence]) -> "IsingGraph":
        return cls(n, tuple(tuple(e) for e in edges))

    @classmethod
    def path(cls, n: int, J: float = 1.0) -> "IsingGraph":
        return cls(n, tuple((i, i + 1, J) for i in range(n - 1)))

    @cached_property
    def neighbors(self) -> tuple:
        """Per-vertex tuple of ``(neighbour, J)`` pairs."""
        adj = [[] for _ in range(self.vertex_count)]
        for u, v, J in self.edges:
            adj[u].append((v, J))
            adj[v].append((u, J))
        return tuple(tuple(a) for a in adj)

    def csr(self, beta: float = 1.0):
        """Adjacency in CSR form with weights ``beta * J``."""
        n = self.vertex_count
        indptr = np.zeros(n + 1, dtype=np.int64)
        for v, nbrs in enumerate(self.neighbors):
            indptr[v + 1] = indptr[v] + len(nbrs)
        indices = np.empty(indptr[-1], dtype=np.int64)
        weights = np.empty(indptr[-1], dtype=np.float64)
        for v, nbrs in enumerate(self.neighbors):
            for k, (w, J) in enumerate(nbrs):
                indices[indptr[v] + k] = w
                weights[indptr[v] + k] = beta * J
        return indptr, indices, weights

    def edge_arrays(self):
        if not self.edges:
            return (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0))
        u, v, J = zip(*self.edges)
        return np.array(u, dtype=np.int64), np.array(v, dtype=np.int64), np.array(J, dtype=np.float64)

    def with_edge_weights(self, weights: Sequence[float]) -> "IsingGraph":
        if len(weights) != len(self.edges):
            raise ValidationError("weight vector length does not match edge count")
        return IsingGraph(self.vertex_count, tuple((u, v, w) for (u, v, _), w in zip(self.edges, weights)))

    def is_connected(self) -> bool:
        n = self.vertex_count
        if n <= 1:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w, _ in self.neighbors[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == n


@dataclass(frozen=True)
class IsingInstance:
    """A graph together with an inverse temperature and a per-vertex field."""

    graph: IsingGraph
    beta: float = 1.0
    field: tuple = ()

    def __post_init__(self):
        beta = float(self.beta)
        if not (math.isfinite(beta) and beta >= 0):
            raise ValidationError(f"beta must be a finite nonnegative real, got {self.beta!r}")
        object.__setattr__(self, "beta", beta)
        g = tuple(as_extended(x) for x in self.field)
        if len(g) != self.graph.vertex_count:
            raise ValidationError(
                f"field has {len(g)} entries but the graph has {self.graph.vertex_count} vertices"
            )
        object.__setattr__(self, "field", g)

    @property
    def n(self) -> int:
        return self.graph.vertex_count

    @property
    def g(self) -> np.ndarray:
        return np.array(self.field, dtype=np.float64)

    def with_field(self, g: Iterable) -> "IsingInstance":
        return IsingInstance(self.graph, self.beta, tuple(g))

    def with_beta(self, beta: float) -> "IsingInstance":
        return IsingInstance(self.graph, beta, self.field)

    def has_infinite_field(self) -> bool:
        return any(math.isinf(x) for x in self.field)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "vertices": self.n,
            "edges": [[u, v, J] for u, v, J in self.graph.edges],
            "field": [extended_to_json(x) for x in self.field],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "IsingInstance":
        for key in ("vertices", "edges", "field"):
            if key not in doc:
                raise ValidationError(f"instance document lacks the {key!r} field")
        graph = IsingGraph(int(doc["vertices"]), tuple(tuple(e) for e in doc["edges"]))
        return cls(graph, float(doc.get("beta", 1.0)), tuple(doc["field"]))


def build_instance(graph: IsingGraph, beta: float = 1.0, g: Iterable | None = None) -> IsingInstance:
    """Validate and assemble an instance; ``beta`` must be strictly positive."""
    if not float(beta) > 0:
        raise ValidationError(f"beta must be positive, got {beta!r}")
    if g is None:
        g = (0.0,) * graph.vertex_count
    return IsingInstance(graph, beta, tuple(g))


def load_instance(path: str | os.PathLike) -> IsingInstance:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return IsingInstance.from_dict(doc)


def dump_instance(instance: IsingInstance, path: str | os.PathLike, extra: Mapping | None = None) -> None:
    doc = instance.to_dict()
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)


@dataclass(frozen=True)
class ReducedInstance:
    """An all-finite instance plus the spins that were pinned away.

    ``offset`` is the exponent contribution of the pinned spins that does not
    depend on the surviving ones: couplings among pinned vertices and the
    finite fields of vertices pinned through ``clamps``.  Infinite field terms
    are dropped.
    """

    instance: IsingInstance
    fixed_spins: Mapping = field(default_factory=dict)
    vertex_map: Mapping = field(default_factory=dict)
    offset: float = 0.0

    @property
    def original_ids(self) -> list:
        inv = [0] * len(self.vertex_map)
        for old, new in self.vertex_map.items():
            inv[new] = old
        return inv


def reduce_infinite_fields(instance: IsingInstance, clamps: Mapping | None = None) -> ReducedInstance:
    """Remove every vertex with an infinite field (or an explicit clamp).

    Each surviving neighbour ``v`` of a removed ``u`` pinned to ``s`` gains
    ``s * beta * J_uv`` in its field, which preserves the conditional law of
    the surviving spins exactly.
    """
    g = instance.field
    fixed: dict[int, int] = {}
    offset = 0.0
    for v, x in enumerate(g):
        if math.isinf(x):
            fixed[v] = 1 if x > 0 else -1
    for v, s in (clamps or {}).items():
        v = int(v)
        if s not in (1, -1):
            raise ValidationError(f"clamp value for vertex {v} must be +1 or -1, got {s!r}")
        if not 0 <= v < instance.n:
            raise ValidationError(f"clamp on unknown vertex {v}")
        if v in fixed and not math.isinf(g[v]) and fixed[v] != s:
            raise ImpossibleEventError(f"vertex {v} clamped to both signs")
        if math.isinf(g[v]):
            if fixed[v] != s:
                raise ImpossibleEventError(
                    f"vertex {v} is pinned to {fixed[v]:+d} by its field; cannot condition on {s:+d}"
                )
            continue
        fixed[v] = s
        offset += g[v] * s

    if not fixed:
        return ReducedInstance(instance, {}, {v: v for v in range(instance.n)}, 0.0)

    survivors = [v for v in range(instance.n) if v not in fixed]
    vmap = {old: new for new, old in enumerate(survivors)}
    new_field = [g[v] for v in survivors]
    edges = []
    beta = instance.beta
    for u, v, J in instance.graph.edges:
        fu, fv = u in fixed, v in fixed
        if fu and fv:
            offset += beta * J * fixed[u] * fixed[v]
        elif fu:
            new_field[vmap[v]] += beta * J * fixed[u]
        elif fv:
            new_field[vmap[u]] += beta * J * fixed[v]
        else:
            edges.append((vmap[u], vmap[v], J))
    reduced = IsingInstance(IsingGraph(len(survivors), tuple(edges)), beta, tuple(new_field))
    return ReducedInstance(reduced, dict(sorted(fixed.items())), vmap, offset)
