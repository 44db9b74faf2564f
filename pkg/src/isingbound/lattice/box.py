"""Finite domains of Z^d with their external l1 boundary."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..core import IsingGraph, IsingInstance
from ..errors import CapacityError, DomainError

MEMORY_CAP_BYTES = 2 * 1024**3


def _unit_vectors(dim):
    for axis in range(dim):
        for step in (1, -1):
            e = [0] * dim
            e[axis] = step
            yield tuple(e)


def l1(x: Sequence[int], y: Sequence[int]) -> int:
    return sum(abs(a - b) for a, b in zip(x, y))


@dataclass(frozen=True)
class LatticeDomain:
    """A finite vertex set ``V`` of Z^d, sites sorted lexicographically.

    Couplings are 1 on every nearest-neighbour bond; bonds to ``boundary``
    sites carry the boundary condition.
    """

    dim: int
    sites: tuple

    @classmethod
    def from_sites(cls, sites: Iterable[Sequence[int]]) -> "LatticeDomain":
        sites = sorted(set(tuple(int(c) for c in s) for s in sites))
        if not sites:
            raise DomainError("empty domain")
        dims = {len(s) for s in sites}
        if len(dims) != 1:
            raise DomainError("sites have mixed dimensions")
        return cls(dims.pop(), tuple(sites))

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.sites)}

    @property
    def n(self) -> int:
        return len(self.sites)

    @cached_property
    def boundary(self) -> tuple:
        """External boundary: sites outside V at l1 distance 1 from V."""
        out = set()
        for s in self.sites:
            for e in _unit_vectors(self.dim):
                t = tuple(a + b for a, b in zip(s, e))
                if t not in self.index:
                    out.add(t)
        return tuple(sorted(out))

    @cached_property
    def boundary_index(self) -> dict:
        return {s: i for i, s in enumerate(self.boundary)}

    @cached_property
    def neighbors(self) -> np.ndarray:
        """(n, 2d) interior neighbour indices, -1 where the neighbour is outside V."""
        nbr = np.full((self.n, 2 * self.dim), -1, dtype=np.int64)
        for i, s in enumerate(self.sites):
            for k, e in enumerate(_unit_vectors(self.dim)):
                nbr[i, k] = self.index.get(tuple(a + b for a, b in zip(s, e)), -1)
        return nbr

    @cached_property
    def boundary_neighbors(self) -> np.ndarray:
        """(n, 2d) boundary-site indices adjacent to each site, -1 elsewhere."""
        nbr = np.full((self.n, 2 * self.dim), -1, dtype=np.int64)
        for i, s in enumerate(self.sites):
            for k, e in enumerate(_unit_vectors(self.dim)):
                nbr[i, k] = self.boundary_index.get(tuple(a + b for a, b in zip(s, e)), -1)
        return nbr

    def boundary_field(self, beta: float, tau) -> np.ndarray:
        """Field ``beta * sum of adjacent boundary spins`` per site.

        ``tau`` is +1, -1, 0 (free) or an array over :attr:`boundary`.
        """
        tau = np.broadcast_to(np.asarray(tau, dtype=np.float64), (len(self.boundary),))
        bn = self.boundary_neighbors
        vals = np.where(bn >= 0, tau[np.maximum(bn, 0)], 0.0)
        return beta * vals.sum(axis=1)

    def graph(self) -> IsingGraph:
        edges = []
        for i, row in enumerate(self.neighbors):
            for j in row:
                if j > i:
                    edges.append((i, int(j), 1.0))
        return IsingGraph(self.n, tuple(edges))

    def to_instance(self, beta: float, field: Sequence[float], tau) -> IsingInstance:
        """Instance on V plus its boundary; boundary spins carry +-inf fields.

        Sites 0..n-1 are V in order, followed by :attr:`boundary`.  ``tau`` may
        be 0 at a boundary site for free (that site is then left out).
        """
        tau = np.broadcast_to(np.asarray(tau, dtype=np.float64), (len(self.boundary),))
        keep = [k for k in range(len(self.boundary)) if tau[k] != 0]
        pos = {k: self.n + i for i, k in enumerate(keep)}
        edges = list(self.graph().edges)
        for i, row in enumerate(self.boundary_neighbors):
            for k in row:
                if k >= 0 and k in pos:
                    edges.append((i, pos[k], 1.0))
        g = [float(x) for x in field] + [math.copysign(math.inf, tau[k]) for k in keep]
        return IsingInstance(IsingGraph(self.n + len(keep), tuple(edges)), beta, tuple(g))

    def distance(self, window: Iterable[Sequence[int]], y: Sequence[int]) -> int:
        return min(l1(x, y) for x in window)

    def rectangle_shape(self):
        """(origin, extents) if the domain is a full axis-aligned box, else None."""
        arr = np.array(self.sites)
        lo, hi = arr.min(axis=0), arr.max(axis=0)
        extents = hi - lo + 1
        if int(np.prod(extents)) != self.n:
            return None
        return tuple(int(x) for x in lo), tuple(int(x) for x in extents)


def build_box(dim: int, N: int, memory_cap: int = MEMORY_CAP_BYTES) -> LatticeDomain:
    """``[-N, N]^d`` intersected with Z^d.  ``N = 0`` (one site) is allowed."""
    if dim < 2:
        raise DomainError(f"dim must be >= 2, got {dim}")
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    n = (2 * N + 1) ** dim
    # neighbour tables, coordinates and two chains
    estimate = n * (4 * dim * 8 + dim * 8 + 2 * 8 + 200)
    if estimate > memory_cap:
        raise CapacityError(f"box d={dim}, N={N} needs about {estimate / 2**20:.0f} MiB, above the cap")
    sites = itertools.product(range(-N, N + 1), repeat=dim)
    return LatticeDomain(dim, tuple(sites))


def build_rectangle(width: int, height: int, origin=(0, 0)) -> LatticeDomain:
    x0, y0 = origin
    return LatticeDomain(2, tuple((x0 + i, y0 + j) for i in range(width) for j in range(height)))


def square(side: int) -> LatticeDomain:
    return build_rectangle(side, side)
