"""Equilibria, price of anarchy and network design for the opinion-formation game."""

from .design import (
    EdgePlan,
    bidirect_approx,
    brute_force_design,
    edge_gradient,
    improvement_bound_check,
    influence_vector,
    optimal_edge_weight,
    rank_one_nash,
    steepest_descent_design,
)
from .equilibrium import (
    EquilibriumResult,
    nash_direct,
    nash_iterative,
    node_cost,
    reduce_fixed_opinions,
    social_cost,
    social_opt,
)
from .graph import Graph, add_edge_weight, build_graph, laplacians, read_graph, write_graph
from .poa import (
    PoAReport,
    cost_matrices,
    directed_worst,
    eulerian_beta,
    phi_curve,
    poa,
    undirected_worst,
)

__version__ = "0.1.0"
