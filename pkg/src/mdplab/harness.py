"""Algorithm dispatch and the scripted experiments behind ``mdplab experiment``."""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .families import mc90_family, random_mdp, vi_lower_bound_family
from .lp import (
    build_dual,
    build_primal,
    dual_to_stochastic_policy,
    solve_lp,
    stochastic_to_deterministic,
)
from .mdp import Mdp, evaluate_stochastic_policy, greedy_policy
from .oracle import brute_force_optimal, optimality_gap
from .simplex import OPTIMAL
from .solvers import (
    SolveReport,
    StoppingRule,
    modified_policy_iteration,
    policy_iteration,
    simple_policy_iteration,
    stopping_threshold,
    value_iteration,
)

ALGORITHMS = ("vi", "pi", "spi", "mpi", "lp-primal", "lp-dual")


def run_algorithm(
    mdp: Mdp,
    algorithm: str,
    epsilon: Optional[float] = 1e-6,
    max_iterations: Optional[int] = None,
    sweeps: int = 5,
    pivot_rule: str = "bland",
) -> SolveReport:
    """Run one of :data:`ALGORITHMS` and wrap the outcome in a SolveReport.

    For the LP methods ``iterations`` is the simplex pivot count and
    ``objective_value`` carries the LP optimum.
    """
    if algorithm == "vi":
        if epsilon is None and max_iterations is None:
            raise ValueError("value iteration needs --epsilon or --max-iters")
        rule = StoppingRule(max_iterations=max_iterations, epsilon_target=epsilon)
        return value_iteration(mdp, stop=rule)
    if algorithm == "pi":
        return policy_iteration(mdp)
    if algorithm == "spi":
        return simple_policy_iteration(mdp, max_switches=max_iterations)
    if algorithm == "mpi":
        kwargs = {} if max_iterations is None else {"max_iterations": max_iterations}
        return modified_policy_iteration(mdp, sweeps=sweeps, **kwargs)
    if algorithm == "lp-primal":
        sol = solve_lp(build_primal(mdp), rule=pivot_rule)
        if sol.status != OPTIMAL:
            raise ArithmeticError(f"primal LP is {sol.status}")
        report = SolveReport(
            policy=greedy_policy(mdp, sol.values),
            values=sol.values,
            iterations=sol.pivots,
            converged=True,
            algorithm_name="lp_primal",
        )
    elif algorithm == "lp-dual":
        sol = solve_lp(build_dual(mdp), rule=pivot_rule)
        if sol.status != OPTIMAL:
            raise ArithmeticError(f"dual LP is {sol.status}")
        probs = dual_to_stochastic_policy(mdp, sol.values)
        report = SolveReport(
            policy=stochastic_to_deterministic(sol.values, mdp.n_actions),
            values=evaluate_stochastic_policy(mdp, probs),
            iterations=sol.pivots,
            converged=True,
            algorithm_name="lp_dual",
        )
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    report.objective_value = sol.objective_value
    return report


# -- experiments --------------------------------------------------------------

EXPERIMENTS = ("mc90-scaling", "vi-gamma-scaling", "cross-check", "stopping-rule")

COLUMNS = {
    "mc90-scaling": ("N", "spi_switches", "pi_iterations", "vi_iterations", "predicted"),
    "vi-gamma-scaling": ("gamma", "observed_crossing", "exact_crossing", "paper_lower_bound"),
    "cross-check": (
        "seed", "n_states", "n_actions", "vi", "pi", "mpi", "lp_primal", "lp_dual",
        "max_disagreement",
    ),
    "stopping-rule": ("epsilon", "seed", "residual_threshold", "achieved_gap", "pass"),
}


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    n_values: tuple[int, ...] = (6, 8, 10, 12, 14)
    gammas: tuple[float, ...] = (0.95,)
    seeds: tuple[int, ...] = tuple(range(10))
    epsilons: tuple[float, ...] = (0.1, 0.01)
    n_actions: int = 2
    sweeps: int = 5
    output: Optional[str] = None

    def __post_init__(self):
        if self.kind not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.kind!r}; choose from {EXPERIMENTS}")
        if not all(0 < g < 1 for g in self.gammas) or not self.gammas:
            raise ValueError("gamma values must lie in (0, 1)")
        if self.kind == "mc90-scaling":
            bad = [n for n in self.n_values if n % 2 or n < 6]
            if bad or not self.n_values:
                raise ValueError(f"mc90 sizes must be even and >= 6: {bad}")
        elif self.kind in ("cross-check", "stopping-rule"):
            if not self.seeds or not self.n_values or min(self.n_values) < 1:
                raise ValueError("need at least one seed and positive state counts")
            if self.n_actions < 1:
                raise ValueError("n_actions must be positive")
            if self.kind == "stopping-rule" and (
                not self.epsilons or min(self.epsilons) <= 0
            ):
                raise ValueError("epsilon values must be positive")


def mc90_scaling(spec: ExperimentSpec):
    gamma = spec.gammas[0]
    for n in spec.n_values:
        inst = mc90_family(n, gamma)
        spi = simple_policy_iteration(inst.mdp, inst.initial_policy)
        pi = policy_iteration(inst.mdp, inst.initial_policy)
        vi = value_iteration(inst.mdp, stop=StoppingRule(epsilon_target=1e-6))
        yield (n, spi.iterations, pi.iterations, vi.iterations, inst.predicted_switches)


def first_crossing(gamma: float, slack: int = 5) -> int:
    """First VI iterate whose greedy action at state 0 is the one-off payment."""
    inst = vi_lower_bound_family(gamma)
    rule = StoppingRule(max_iterations=inst.exact_crossing + slack)
    run = value_iteration(inst.mdp, stop=rule, track_policies=True)
    for n, policy in enumerate(run.policy_history, start=1):
        if policy[0] == 1:
            return n
    return -1


def vi_gamma_scaling(spec: ExperimentSpec):
    for gamma in spec.gammas:
        inst = vi_lower_bound_family(gamma)
        yield (gamma, first_crossing(gamma), inst.exact_crossing, inst.predicted_lower_bound)


def cross_check_mdp(mdp: Mdp, sweeps: int = 5) -> dict:
    """Value vectors from every method plus the oracle, and their distances."""
    oracle = brute_force_optimal(mdp)
    runs = {
        "vi": run_algorithm(mdp, "vi", epsilon=1e-6),
        "pi": run_algorithm(mdp, "pi"),
        "mpi": run_algorithm(mdp, "mpi", sweeps=sweeps),
        "lp_primal": run_algorithm(mdp, "lp-primal"),
        "lp_dual": run_algorithm(mdp, "lp-dual"),
    }
    vectors = [oracle.optimal_values] + [r.values for r in runs.values()]
    pairwise = max(
        float(np.max(np.abs(a - b))) for a, b in itertools.combinations(vectors, 2)
    )
    errors = {
        name: float(np.max(np.abs(r.values - oracle.optimal_values)))
        for name, r in runs.items()
    }
    gaps = {name: optimality_gap(mdp, r.policy, oracle=oracle) for name, r in runs.items()}
    return {"oracle": oracle, "runs": runs, "errors": errors, "gaps": gaps,
            "max_disagreement": pairwise}


def cross_check(spec: ExperimentSpec):
    gamma = spec.gammas[0]
    for n in spec.n_values:
        for seed in spec.seeds:
            mdp = random_mdp(n, spec.n_actions, gamma, seed)
            res = cross_check_mdp(mdp, spec.sweeps)
            e = res["errors"]
            yield (seed, n, spec.n_actions, e["vi"], e["pi"], e["mpi"], e["lp_primal"],
                   e["lp_dual"], res["max_disagreement"])


def stopping_rule_run(mdp: Mdp, epsilon: float):
    """Run VI to the epsilon stopping threshold; return (threshold, gap, run)."""
    threshold = stopping_threshold(epsilon, mdp.discount)
    run = value_iteration(mdp, stop=StoppingRule(residual_threshold=threshold))
    return threshold, optimality_gap(mdp, run.policy), run


def stopping_rule(spec: ExperimentSpec):
    gamma = spec.gammas[0]
    for eps in spec.epsilons:
        for n in spec.n_values:
            for seed in spec.seeds:
                mdp = random_mdp(n, spec.n_actions, gamma, seed)
                threshold, gap, _ = stopping_rule_run(mdp, eps)
                yield (eps, seed, threshold, gap, "pass" if gap <= eps else "fail")


_RUNNERS = {
    "mc90-scaling": mc90_scaling,
    "vi-gamma-scaling": vi_gamma_scaling,
    "cross-check": cross_check,
    "stopping-rule": stopping_rule,
}


def run_experiment(spec: ExperimentSpec) -> list[tuple]:
    """Run the experiment grid in deterministic order; write CSV if requested."""
    rows = list(_RUNNERS[spec.kind](spec))
    if spec.output:
        with open(spec.output, "w", newline="") as fh:
            fh.write(format_csv(COLUMNS[spec.kind], rows))
    return rows


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def format_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()
