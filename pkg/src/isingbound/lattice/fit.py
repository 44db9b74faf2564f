"""Log-linear decay fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of ``log value = intercept + slope * x``.

    ``points`` holds ``(x, value, stderr)``; non-positive values cannot be
    logged and are left out of the fit (and counted in ``dropped``).
    """

    points: tuple
    slope: float
    intercept: float
    r_squared: float
    dropped: int = 0

    @property
    def rate(self) -> float:
        """Decay rate ``-slope``."""
        return -self.slope

    @property
    def prefactor(self) -> float:
        return math.exp(self.intercept)

    def to_dict(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "slope": self.slope, "intercept": self.intercept,
            "r_squared": self.r_squared, "dropped": self.dropped,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecayFit":
        return cls(tuple(tuple(p) for p in d["points"]), d["slope"], d["intercept"], d["r_squared"], d.get("dropped", 0))


def fit_decay(xs, values, stderrs=None) -> DecayFit:
    xs = np.asarray(xs, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    stderrs = np.zeros_like(values) if stderrs is None else np.asarray(stderrs, dtype=np.float64)
    points = tuple((float(x), float(v), float(s)) for x, v, s in zip(xs, values, stderrs))
    keep = values > 0
    if keep.sum() < 2 or np.unique(xs[keep]).size < 2:
        raise DomainError("need two distinct positive points to fit a decay")
    x, y = xs[keep], np.log(values[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float((resid**2).sum()) / ss_tot
    return DecayFit(points, float(slope), float(intercept), float(min(1.0, max(0.0, r2))), int((~keep).sum()))
