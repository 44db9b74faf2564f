"""Total variation between window marginals under boundaries differing at one site.

Exact marginals come from enumeration when the domain is small and from
column transfer matrices for 2-d rectangles otherwise.  The sequential
sphere coupling gives a union bound on the same distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import IsingGraph, IsingInstance
from ..errors import CapacityError, DomainError
from ..exact import DEFAULT_CAP, exact_stats
from ..seeds import child_seed
from .box import LatticeDomain, l1
from .glauber import CoupledChains, batch_means, pooled
from .transfer import MAX_WIDTH, RectangleSolver

WINDOW_CAP = 12
STEP_TOL = 1e-10


@dataclass(frozen=True)
class SSMQuery:
    """Boundary ``tau`` on ``domain.boundary`` (scalar or array of +-1), the
    boundary site ``y`` whose spin is flipped, a window inside the domain,
    a finite field on the domain and the inverse temperature."""

    domain: LatticeDomain
    tau: object
    y: tuple
    window: tuple
    field: tuple
    beta: float
    flip: bool = True

    def __post_init__(self):
        y = tuple(int(c) for c in self.y)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "window", tuple(tuple(int(c) for c in s) for s in self.window))
        if y not in self.domain.boundary_index:
            raise DomainError(f"flip site {y} is not on the boundary")
        if not self.window:
            raise DomainError("empty window")
        for s in self.window:
            if s not in self.domain.index:
                raise DomainError(f"window site {s} is outside the domain")
        f = np.asarray(self.field, dtype=np.float64)
        if f.shape != (self.domain.n,) or not np.all(np.isfinite(f)):
            raise DomainError("field must be finite with one value per domain site")
        if not self.beta >= 0:
            raise DomainError("beta must be >= 0")
        tau = self.tau_array()
        if not np.all(np.abs(tau) == 1):
            raise DomainError("tau must be +-1 on every boundary site")

    def tau_array(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.tau, dtype=np.float64), (len(self.domain.boundary),)).copy()

    def tau_flipped(self) -> np.ndarray:
        t = self.tau_array()
        if self.flip:
            t[self.domain.boundary_index[self.y]] *= -1
        return t

    @property
    def distance(self) -> int:
        return self.domain.distance(self.window, self.y)

    @property
    def window_index(self) -> list:
        return [self.domain.index[s] for s in self.window]


class _Exact:
    """log Z and magnetizations of the domain for a per-site field (+-inf pins).

    ``method`` is ``auto`` (transfer matrices for narrow 2-d rectangles,
    enumeration otherwise), ``transfer`` or ``enumeration``.
    """

    def __init__(self, domain: LatticeDomain, beta: float, method: str = "auto"):
        self.domain = domain
        self.beta = beta
        self.solver = None
        shape = domain.rectangle_shape()
        narrow = domain.dim == 2 and shape is not None and min(shape[1]) <= MAX_WIDTH
        if method not in ("auto", "transfer", "enumeration"):
            raise DomainError(f"unknown exact method {method!r}")
        if method == "transfer" or (method == "auto" and narrow):
            if not narrow:
                raise CapacityError("transfer matrices need a 2-d rectangle of width <= %d" % MAX_WIDTH)
            self.solver = RectangleSolver(domain, beta)
        elif domain.n > DEFAULT_CAP:
            raise CapacityError(
                f"{domain.n} sites exceed the enumeration cap and the domain is not a narrow 2-d rectangle"
            )
        else:
            self.graph = domain.graph()

    def solve(self, field):
        field = np.asarray(field, dtype=np.float64)
        if self.solver is not None:
            return self.solver.solve(field)
        st = exact_stats(IsingInstance(self.graph, self.beta, tuple(field)), list(range(self.domain.n)))
        return st.log_z, np.array([st.magnetizations[i] for i in range(self.domain.n)])


def window_marginal(exact: _Exact, field, window_index) -> np.ndarray:
    """Joint law of the window spins, indexed by bit k <-> spin of window[k]."""
    k = len(window_index)
    if k > WINDOW_CAP:
        raise CapacityError(f"window of {k} sites exceeds the tabulation cap {WINDOW_CAP}")
    field = np.asarray(field, dtype=np.float64)
    log_z, _ = exact.solve(field)
    logp = np.empty(1 << k)
    for code in range(1 << k):
        pinned = field.copy()
        extra = 0.0
        for b, i in enumerate(window_index):
            s = 1.0 if (code >> b) & 1 else -1.0
            pinned[i] = s * math.inf
            extra += s * field[i]
        logp[code] = exact.solve(pinned)[0] + extra - log_z
    p = np.exp(logp)
    return p / p.sum()


def _tv(p, q) -> float:
    return 0.5 * float(np.abs(p - q).sum())


@dataclass
class SSMEstimate:
    method: str
    tv: float
    stderr: float
    distance: int
    sweeps: int = 0
    replicas: int = 0
    order_violations: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def ssm_estimate(q: SSMQuery, method: str = "exact", sweeps: int = 20_000, replicas: int = 4, seed: int = 0,
                 random_scan: bool = False, exact_method: str = "auto") -> SSMEstimate:
    """TV distance on the window between the boundary ``tau`` and ``tau`` with
    ``y`` flipped.

    ``coupled-mc`` reports how often chains driven by identical noise
    disagree somewhere on the window; that frequency bounds the TV from above
    and equals it for a single-site window.
    """
    if len(q.window) > WINDOW_CAP:
        raise CapacityError(f"window of {len(q.window)} sites exceeds the tabulation cap {WINDOW_CAP}")
    d = q.distance
    h = np.asarray(q.field, dtype=np.float64)
    tau, tau_y = q.tau_array(), q.tau_flipped()
    if method == "exact":
        if not q.flip:
            return SSMEstimate("exact", 0.0, 0.0, d)
        exact = _Exact(q.domain, q.beta, exact_method)
        p = window_marginal(exact, h + q.domain.boundary_field(q.beta, tau), q.window_index)
        r = window_marginal(exact, h + q.domain.boundary_field(q.beta, tau_y), q.window_index)
        return SSMEstimate("exact", _tv(p, r), 0.0, d)
    if method not in ("mc", "coupled-mc"):
        raise DomainError(f"unknown method {method!r}")
    # the boundary with + at y dominates
    upper, lower = (tau, tau_y) if tau[q.domain.boundary_index[q.y]] > 0 else (tau_y, tau)
    batches, violations = [], 0
    for r in range(replicas):
        chains = CoupledChains.for_boundaries(q.domain, q.beta, h, upper, lower,
                                              child_seed(seed, "ssm", r), random_scan)
        _, _, dis = chains.run(sweeps, window=q.window_index)
        batches.append(batch_means(dis.astype(np.float64)))
        violations += chains.violations
    est = pooled(batches)
    return SSMEstimate("coupled-mc", est.mean, est.stderr, d, sweeps, replicas, violations)


# ---------------------------------------------------------------- sphere coupling

def sphere_radius(distance: int) -> int:
    return max(1, distance // 2)


def sphere_sites(domain: LatticeDomain, y, radius: int) -> list:
    """Sites of the domain at l1 distance ``radius`` from ``y``, lexicographic."""
    return [s for s in domain.sites if l1(s, y) == radius]


def _influence_bound_field(domain: LatticeDomain, beta: float, y) -> tuple:
    """Zero-field model on the domain with only ``y`` pinned; the other boundary
    sites are free.  A free boundary site with a single neighbour in the
    domain sums out to a constant and is dropped; others are kept."""
    keep = []
    for b, site in enumerate(domain.boundary):
        if site == tuple(y):
            continue
        if int((domain.boundary_neighbors == b).sum()) >= 2:
            keep.append(b)
    yb = domain.boundary_index[tuple(y)]
    return keep, yb


def _bound_magnetizations(domain, beta, y, sign, cache):
    """Magnetizations with ``y`` pinned to ``sign``, zero field, other boundary free."""
    key = (tuple(y), sign)
    if key in cache:
        return cache[key]
    keep, yb = _influence_bound_field(domain, beta, y)
    tau = np.zeros(len(domain.boundary))
    tau[yb] = sign
    if not keep:
        exact = cache.setdefault("exact", _Exact(domain, beta))
        mags = exact.solve(domain.boundary_field(beta, tau))[1]
    else:
        n = domain.n
        edges = list(domain.graph().edges)
        for j, b in enumerate(keep):
            for i in np.nonzero((domain.boundary_neighbors == b).any(axis=1))[0]:
                edges.append((int(i), n + j, 1.0))
        field = domain.boundary_field(beta, tau)
        inst = IsingInstance(IsingGraph(n + len(keep), tuple(edges)), beta, tuple(field) + (0.0,) * len(keep))
        st = exact_stats(inst, list(range(n)))
        mags = np.array([st.magnetizations[i] for i in range(n)])
    cache[key] = mags
    return mags


@dataclass
class SphereCoupling:
    y: tuple
    distance: int
    radius: int
    sites: list
    bounds: list
    actual: list
    history: list
    exact_tv: float
    steps_ok: bool = True

    @property
    def total(self) -> float:
        return float(sum(self.bounds))

    @property
    def capped_total(self) -> float:
        return min(1.0, self.total)

    @property
    def dominates(self) -> bool:
        return self.capped_total + STEP_TOL >= self.exact_tv

    def to_dict(self) -> dict:
        return {
            "y": list(self.y), "distance": self.distance, "radius": self.radius,
            "sites": [list(s) for s in self.sites],
            "bounds": self.bounds, "actual": self.actual, "history": self.history,
            "total": self.total, "capped_total": self.capped_total,
            "exact_tv": self.exact_tv, "dominates": self.dominates, "steps_ok": self.steps_ok,
        }


def sphere_coupling(q: SSMQuery, cache: dict | None = None) -> SphereCoupling:
    """Couple the spins on the l1 sphere around ``y`` one at a time.

    Step ``k`` couples ``v_k`` maximally under the two boundaries, given that
    ``v_1..v_{k-1}`` were coupled and agree.  Its failure probability is at
    most half the zero-field influence of ``y`` on ``v_k`` with every other
    boundary spin free; those bounds add up to a bound on the TV of the
    window, because the sphere separates ``y`` from the window.

    ``actual`` records the step probabilities along one agreeing history
    (each spin set to its likelier value under ``tau``); each must sit below
    its bound.
    """
    cache = {} if cache is None else cache
    dom = q.domain
    d = q.distance
    R = sphere_radius(d)
    sites = sphere_sites(dom, q.y, R)
    exact = cache.setdefault("exact", _Exact(dom, q.beta))
    h = np.asarray(q.field, dtype=np.float64)
    f_tau = h + dom.boundary_field(q.beta, q.tau_array())
    f_flip = h + dom.boundary_field(q.beta, q.tau_flipped())
    plus = _bound_magnetizations(dom, q.beta, q.y, 1.0, cache)
    minus = _bound_magnetizations(dom, q.beta, q.y, -1.0, cache)
    bounds, actual, history = [], [], []
    a_tau, a_flip = f_tau.copy(), f_flip.copy()
    ok = True
    for s in sites:
        i = dom.index[s]
        bk = 0.5 * float(plus[i] - minus[i]) if q.flip else 0.0
        m_tau = exact.solve(a_tau)[1][i]
        m_flip = exact.solve(a_flip)[1][i] if q.flip else m_tau
        ak = 0.5 * abs(float(m_tau - m_flip))
        ok &= ak <= bk + STEP_TOL
        bounds.append(max(bk, 0.0))
        actual.append(ak)
        spin = 1.0 if m_tau >= 0 else -1.0
        history.append(int(spin))
        a_tau[i] = a_flip[i] = spin * math.inf
    tv = ssm_estimate(q, "exact").tv
    return SphereCoupling(q.y, d, R, sites, bounds, actual, history, tv, bool(ok))


# ---------------------------------------------------------------- scans

@dataclass
class TVScan:
    """Exact TV for every boundary site ``y``, grouped by distance."""

    rows: list = field(default_factory=list)  # (y, distance, tv)

    def max_by_distance(self) -> dict:
        out = {}
        for y, d, tv in self.rows:
            out[d] = max(out.get(d, 0.0), tv)
        return dict(sorted(out.items()))

    def monotone(self, slack: float = 1e-10) -> bool:
        vals = list(self.max_by_distance().values())
        return all(b <= a + slack for a, b in zip(vals, vals[1:]))

    def to_dict(self) -> dict:
        return {
            "rows": [{"y": list(y), "distance": d, "tv": tv} for y, d, tv in self.rows],
            "max_by_distance": {str(k): v for k, v in self.max_by_distance().items()},
            "monotone": self.monotone(),
        }


def tv_scan(domain: LatticeDomain, beta: float, field, window, tau=1.0) -> TVScan:
    """Exact TV on ``window`` for each boundary flip site.

    The window marginal under ``tau`` is shared by all flips, so it is
    computed once.
    """
    window = [tuple(s) for s in window]
    exact = _Exact(domain, beta)
    h = np.asarray(field, dtype=np.float64)
    idx = [domain.index[s] for s in window]
    tau = np.broadcast_to(np.asarray(tau, float), (len(domain.boundary),)).copy()
    base = window_marginal(exact, h + domain.boundary_field(beta, tau), idx)
    scan = TVScan()
    for b, y in enumerate(domain.boundary):
        t = tau.copy()
        t[b] *= -1
        p = window_marginal(exact, h + domain.boundary_field(beta, t), idx)
        scan.rows.append((y, domain.distance(window, y), _tv(base, p)))
    return scan
