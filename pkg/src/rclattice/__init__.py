"""Random-cluster model on n x n boxes: exact measures, heat-bath dynamics,
monotone coupling, coupling from the past, duality and estimators."""

from .boundary import (BoundaryCondition, all_side_homogeneous, free, induced_condition,
                       is_side_homogeneous, parse_bc, refines, side_homogeneous, wired)
from .config import RcConfig, components, connected, gamma_region, is_cut_edge
from .duality import (DualParams, compatible_primal, critical_point, dual_box, dual_config,
                      dual_p, dual_sample, induced_primal_step)
from .dynamics import (ChainState, CouplingResult, cftp_sample, cftp_samples, coupling_time,
                       grand_coupling, new_chain, run, step)
from .errors import CapExceeded, MonotonicityViolation
from .estimators import (estimate_decay, estimate_spatial_mixing, fit_mixing_scaling,
                         sandwich_run)
from .lattice import Lattice, box_region, build_dual, build_lattice
from .oracle import (connectivity_prob, edge_marginals, exact_marginals, exact_measure,
                     mixing_time, stationary_vector, transition_matrix)
from .params import RcParams

__version__ = "0.1.0"
