from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..core import extended_to_json

DEFAULT_TOL = 1e-9


def _jsonable(x):
    if isinstance(x, np.generic):
        x = x.item()
    elif isinstance(x, np.ndarray):
        x = x.tolist()
    if isinstance(x, float):
        return extended_to_json(x) if math.isinf(x) else x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def digest(payload) -> str:
    """Stable 16-hex-digit hash of a JSON-able payload."""
    text = json.dumps(_jsonable(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class InequalityReport:
    """One evaluated inequality ``lhs <= rhs``."""

    kind: str
    lhs: float
    rhs: float
    tolerance: float
    instance_digest: str

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.margin >= -self.tolerance

    def to_dict(self) -> dict:
        d = asdict(self)
        d["margin"] = self.margin
        d["holds"] = self.holds
        return d
