"""Vectorised enumeration for many field vectors on one small graph.

Used where the same graph is queried under thousands of fields (the
exhaustive theorem sweep).  Infinite fields are handled by masking the
configurations that disagree with the pinned spins.
"""

import numpy as np

from ..core import IsingGraph
from ..errors import CapacityError

DENSE_CAP = 16


def all_configurations(n: int) -> np.ndarray:
    """(2**n, n) array of spins; row k has spin v = +1 iff bit v of k is set."""
    if n > DENSE_CAP:
        raise CapacityError(f"dense enumeration limited to {DENSE_CAP} spins, got {n}")
    k = np.arange(1 << n, dtype=np.int64)[:, None]
    bits = (k >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return (2 * bits - 1).astype(np.float64)


def coupling_exponent(graph: IsingGraph, beta: float, spins: np.ndarray) -> np.ndarray:
    u, v, J = graph.edge_arrays()
    if len(J) == 0:
        return np.zeros(spins.shape[0])
    return beta * (spins[:, u] * spins[:, v]) @ J


def batch_magnetizations(graph: IsingGraph, beta: float, fields: np.ndarray) -> np.ndarray:
    """Magnetizations of every vertex for each row of ``fields`` (B, n).

    Fields may contain +-inf.  Rows whose pins are contradictory are not
    expected (every row must admit a configuration).
    """
    fields = np.atleast_2d(np.asarray(fields, dtype=np.float64))
    n = graph.vertex_count
    spins = all_configurations(n)
    base = coupling_exponent(graph, beta, spins)
    pinned = np.isinf(fields)
    finite = np.where(pinned, 0.0, fields)
    logw = base[None, :] + finite @ spins.T
    if pinned.any():
        sign = np.sign(fields) * pinned  # (B, n): +-1 where pinned, 0 elsewhere
        # configuration allowed iff spins agree with every pin
        clash = (sign[:, None, :] * spins[None, :, :]) < 0
        logw = np.where(clash.any(axis=2), -np.inf, logw)
    top = logw.max(axis=1, keepdims=True)
    w = np.exp(logw - top)
    w /= w.sum(axis=1, keepdims=True)
    return w @ spins
