from .counterexamples import (
    InsertionCheck,
    PathCertificate,
    TreeCertificate,
    counterexample_path,
    counterexample_tree,
    effective_coupling_insertion_check,
    solve_tree_field,
)
from .fuzz import CampaignSummary, fuzz_inequalities
from .lemma import (
    LemmaPoint,
    LemmaSweep,
    d_witness,
    lemma_objective,
    lemma_objective_direct,
    lemma_point,
    lemma_sweep,
    m_theta,
    m_theta_grid,
    sample_points,
    witness_sides,
)
from .reports import DEFAULT_TOL, InequalityReport, digest
from .theorem import (
    ExhaustiveSweep,
    GHSScan,
    check_boundary_condition_influence,
    check_boundary_influence,
    check_correlation,
    exhaustive_influence_sweep,
    ghs_monotonicity_scan,
    influence_sides,
)

__all__ = [
    "CampaignSummary", "DEFAULT_TOL", "ExhaustiveSweep", "exhaustive_influence_sweep", "GHSScan", "InequalityReport", "InsertionCheck", "LemmaPoint", "LemmaSweep", "lemma_sweep",
    "PathCertificate", "TreeCertificate", "check_boundary_condition_influence", "check_boundary_influence",
    "check_correlation", "counterexample_path", "counterexample_tree", "d_witness", "digest",
    "effective_coupling_insertion_check", "fuzz_inequalities", "ghs_monotonicity_scan", "influence_sides",
    "lemma_objective", "lemma_objective_direct", "lemma_point", "m_theta", "m_theta_grid", "sample_points",
    "solve_tree_field", "witness_sides",
]
