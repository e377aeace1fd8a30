"""Tabular MDP solvers and worst-case iteration-count experiments."""
from .families import (
    Mc90Instance,
    ViLowerBoundInstance,
    mc90_family,
    random_mdp,
    random_rational_mdp,
    vi_crossing_iteration,
    vi_lower_bound_family,
)
from .lp import (
    LpProgram,
    LpSolution,
    build_dual,
    build_primal,
    dual_to_stochastic_policy,
    export_lp,
    parse_lp,
    policy_basis_solution,
    solve_lp,
    stochastic_to_deterministic,
)
from .mdp import (
    InvalidMdpError,
    Mdp,
    bellman_backup,
    bellman_residual,
    evaluate_policy,
    evaluate_stochastic_policy,
    greedy_policy,
    validate,
    value_range_bound,
)
from .oracle import (
    OracleResult,
    brute_force_optimal,
    is_epsilon_optimal,
    verify_optimality_equations,
)
from .solvers import (
    SolveReport,
    StoppingRule,
    iteration_upper_bound,
    modified_policy_iteration,
    policy_iteration,
    simple_policy_iteration,
    stopping_threshold,
    value_iteration,
)

__version__ = "0.1.0"
