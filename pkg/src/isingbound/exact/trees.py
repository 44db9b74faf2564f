"""Closed-form effective fields on trees.

On a tree the effective field that a subtree hanging off ``u`` through an
edge of strength ``J`` exerts on ``u`` is ``atanh(tanh J * tanh phi)``, where
``phi`` is the total field on the subtree's root.
"""

import math

from ..core import IsingInstance
from ..errors import DomainError

ATANH_MAX = 40.0
_EDGE = 1.0 - 1e-15


def safe_atanh(x: float, cap: float = ATANH_MAX) -> float:
    """atanh that saturates to +-cap instead of overflowing near +-1."""
    if x >= _EDGE:
        return cap
    if x <= -_EDGE:
        return -cap
    return math.atanh(x)


def edge_message(J: float, phi: float) -> float:
    """Effective field transmitted through a coupling ``J`` from a spin under field ``phi``."""
    return safe_atanh(math.tanh(J) * math.tanh(phi))


def tree_effective_field(instance: IsingInstance, o: int) -> float:
    """Effective field at ``o`` (own field excluded) by the leaf-to-root recursion.

    ``beta`` multiplies every coupling.  Raises if the graph has a cycle.
    """
    g = instance.graph
    if len(g.edges) != g.vertex_count - 1 or not g.is_connected():
        raise DomainError("tree_effective_field needs a tree")
    beta = instance.beta

    def total_field(u, parent):
        phi = instance.field[u]
        for w, J in g.neighbors[u]:
            if w != parent:
                phi += edge_message(beta * J, total_field(w, u))
        return phi

    lam = 0.0
    for w, J in g.neighbors[o]:
        lam += edge_message(beta * J, total_field(w, o))
    return lam
