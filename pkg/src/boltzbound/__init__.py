"""Higher-order polynomial lower bounds on the Boltzmann machine partition function."""

from .engine import (
    BoundResult,
    approx_correlation,
    approx_correlations,
    bounds_for_orders,
    lower_bound_log_z,
    relative_error,
)
from .evaluator import delta_h_moments_graph, graph_contribution
from .graphs import (
    GraphCatalog,
    PartitionGraph,
    canonical_form,
    elimination_order,
    enumerate_partitions,
    load_catalog,
    packaged_catalog,
    save_catalog,
)
from .model import (
    BoltzmannMachine,
    MeanFieldState,
    MomentVector,
    brute_force_delta_h_moments,
    corrected_moments,
    exact_correlation,
    exact_log_partition,
    is_attractor,
    log_z_tilde,
    sk_random,
    solve_mean_field,
)
from .poly_bounds import (
    BoundPolynomial,
    build_coefficients,
    build_derivative,
    embed_next_order,
    eval_bound,
    optimal_mus,
)

__version__ = "0.1.0"
