"""Exact and Monte Carlo checks of boundary-influence inequalities for
ferromagnetic Ising models."""

import os

# TBB in this environment is too old for numba; skip the probe.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from .core import (  # noqa: E402
    IsingGraph,
    IsingInstance,
    ReducedInstance,
    build_instance,
    load_instance,
    reduce_infinite_fields,
)
from .errors import (  # noqa: E402
    CapacityError,
    ConstructionError,
    DomainError,
    ImpossibleEventError,
    IsingError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConstructionError",
    "DomainError",
    "ImpossibleEventError",
    "IsingError",
    "IsingGraph",
    "IsingInstance",
    "ReducedInstance",
    "ValidationError",
    "build_instance",
    "load_instance",
    "reduce_infinite_fields",
]
