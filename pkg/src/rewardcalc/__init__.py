"""Discounted discrete calculus on MDP transition graphs.

Gradient, line integral, curl, divergence, and Laplacian operators with a
discount factor; the orthogonal decomposition of rewards into
divergence-free + gradient parts; potential-shaping canonicalization and a
shaping-invariant reward distance; and exact conservativeness and
optimality-preservation checkers.
"""

from .analysis import (
    CONSERVATIVE,
    COUNTEREXAMPLE_FOUND,
    FINITELY_CONSERVATIVE_ONLY,
    NO_COUNTEREXAMPLE,
    NOT_FINITELY_CONSERVATIVE,
    ConservativenessVerdict,
    ConstructedPotential,
    OptimalityCounterexample,
    OptimalityVerdict,
    Policy,
    all_policies_optimal,
    check_conservative,
    check_finitely_conservative,
    check_optimality_preserving,
    construct_potential_shortest_path,
    is_action_independent,
    q_star,
    solve_potential,
)
from .decompose import Decomposition, canonicalize, decompose, shaping_distance
from .errors import (
    DomainMismatchError,
    EnumerationCapError,
    GraphInvariantError,
    InputError,
    RewardCalcError,
    SolverError,
)
from .fields import (
    Potential,
    Reward,
    inner_product_potentials,
    inner_product_rewards,
    potential_norm,
    reward_combine,
    reward_norm,
)
from .graphs import (
    DeterministicDynamics,
    Diamond,
    DynamicsEnumeration,
    LassoTrajectory,
    TopologyReport,
    Trajectory,
    Transition,
    TransitionGraph,
    enumerate_deterministic_dynamics,
    enumerate_diamonds,
    enumerate_trajectories,
    topology_report,
    validate,
)
from .operators import (
    CurlField,
    LaplacianMatrix,
    curl,
    divergence,
    grad,
    laplacian_apply,
    laplacian_matrix,
    line_integral_finite,
    line_integral_lasso,
    max_abs_curl,
)
from .tolerance import DEFAULT_TOL, Tolerance

__version__ = "0.1.0"

__all__ = [
    "CONSERVATIVE",
    "COUNTEREXAMPLE_FOUND",
    "FINITELY_CONSERVATIVE_ONLY",
    "NO_COUNTEREXAMPLE",
    "NOT_FINITELY_CONSERVATIVE",
    "ConservativenessVerdict",
    "ConstructedPotential",
    "CurlField",
    "DEFAULT_TOL",
    "Decomposition",
    "DeterministicDynamics",
    "Diamond",
    "DomainMismatchError",
    "DynamicsEnumeration",
    "EnumerationCapError",
    "GraphInvariantError",
    "InputError",
    "LaplacianMatrix",
    "LassoTrajectory",
    "OptimalityCounterexample",
    "OptimalityVerdict",
    "Policy",
    "Potential",
    "Reward",
    "RewardCalcError",
    "SolverError",
    "Tolerance",
    "TopologyReport",
    "Trajectory",
    "Transition",
    "TransitionGraph",
    "all_policies_optimal",
    "canonicalize",
    "check_conservative",
    "check_finitely_conservative",
    "check_optimality_preserving",
    "construct_potential_shortest_path",
    "curl",
    "decompose",
    "divergence",
    "enumerate_deterministic_dynamics",
    "enumerate_diamonds",
    "enumerate_trajectories",
    "grad",
    "inner_product_potentials",
    "inner_product_rewards",
    "is_action_independent",
    "laplacian_apply",
    "laplacian_matrix",
    "line_integral_finite",
    "line_integral_lasso",
    "max_abs_curl",
    "potential_norm",
    "q_star",
    "reward_combine",
    "reward_norm",
    "shaping_distance",
    "solve_potential",
    "topology_report",
    "validate",
]
