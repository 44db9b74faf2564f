from .box import LatticeDomain, build_box, build_rectangle, l1, square
from .fit import DecayFit, fit_decay
from .glauber import CoupledChains, Estimate, batch_means, glauber_sweep, pooled
from .rfim import (
    BETA_C,
    InfluenceRow,
    RFIMResult,
    draw_field,
    exact_boundary_influence,
    parse_field_spec,
    rfim_influence,
)
from .ssm import (
    SphereCoupling,
    SSMEstimate,
    SSMQuery,
    TVScan,
    sphere_coupling,
    sphere_radius,
    sphere_sites,
    ssm_estimate,
    tv_scan,
    window_marginal,
)
from .transfer import RectangleSolver

__all__ = [
    "BETA_C", "CoupledChains", "DecayFit", "Estimate", "InfluenceRow", "LatticeDomain",
    "RFIMResult", "RectangleSolver", "SSMEstimate", "SSMQuery", "SphereCoupling", "TVScan",
    "batch_means", "build_box", "build_rectangle", "draw_field", "exact_boundary_influence",
    "fit_decay", "glauber_sweep", "l1", "parse_field_spec", "pooled", "rfim_influence",
    "sphere_coupling", "sphere_radius", "sphere_sites", "square", "ssm_estimate", "tv_scan",
    "window_marginal",
]
