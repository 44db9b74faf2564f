from .engine import (
    DEFAULT_CAP,
    DegenerateMixtureWarning,
    EffectiveFieldResult,
    ExactStats,
    conditional_expectation,
    covariance,
    effective_field,
    exact_stats,
    log_partition,
    magnetization,
    mixture_alpha,
    reset_field,
)
from .trees import edge_message, safe_atanh, tree_effective_field

__all__ = [
    "DEFAULT_CAP",
    "DegenerateMixtureWarning",
    "EffectiveFieldResult",
    "ExactStats",
    "conditional_expectation",
    "covariance",
    "edge_message",
    "effective_field",
    "exact_stats",
    "log_partition",
    "magnetization",
    "mixture_alpha",
    "reset_field",
    "safe_atanh",
    "tree_effective_field",
]
