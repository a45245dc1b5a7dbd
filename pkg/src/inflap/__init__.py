"""Infinity-Laplacian eigenvalue machinery on weighted graphs with a Dirichlet boundary."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .graph import (  # noqa: E402
    EdgeFunction,
    Graph,
    boundary_distance,
    divergence,
    gradient,
    norm_p,
    shortest_distance,
    validate_graph,
)
from .packing import PackingResult, cone_functions, packing_radius  # noqa: E402
from .p_spectral import (  # noqa: E402
    Eigenpair,
    PSweepRecord,
    SolverOptions,
    delta_p,
    eigen_residual_p,
    minimize_rayleigh,
    p_sweep,
    rayleigh_p,
)
from .inf_spectral import (  # noqa: E402
    check_limit_equation,
    densities_from_certificate,
    find_generalized_certificate,
    inf_laplacian,
    infinity_variational_bounds,
    support_subgraph_check,
    verify_certificate,
)
from .nodal import nodal_bounds_check, nodal_domains, split_at_zeros  # noqa: E402
