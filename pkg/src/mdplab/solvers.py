"""Value iteration, policy iteration and their variants.

Iteration units differ by algorithm: value iteration counts backup sweeps,
policy iteration and modified policy iteration count improvement phases, and
simple policy iteration counts single-state switches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .mdp import (
    Mdp,
    as_policy,
    bellman_backup,
    bellman_residual,
    evaluate_policy,
)

# Strictness margin for "q < v" in the improvement step, relative to max(1, |v|).
IMPROVEMENT_TOL = 1e-10
MPI_RESIDUAL_TOL = 1e-10
MPI_MAX_ITERATIONS = 1_000_000


def stopping_threshold(epsilon: float, gamma: float) -> float:
    """Bellman-residual level below which the greedy policy is epsilon-optimal."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return epsilon * (1.0 - gamma) / (2.0 * gamma)


def iteration_upper_bound(bits: int, epsilon: float, gamma: float) -> int:
    """Ceiling of ``(B + log2(1/eps) + log2(1/(1-gamma)) + 1) / (1-gamma)``."""
    if bits < 1 or epsilon <= 0 or not 0 < gamma < 1:
        raise ValueError("need bits >= 1, epsilon > 0, 0 < gamma < 1")
    total = bits + math.log2(1.0 / epsilon) + math.log2(1.0 / (1.0 - gamma)) + 1.0
    return math.ceil(total / (1.0 - gamma))


@dataclass(frozen=True)
class StoppingRule:
    max_iterations: Optional[int] = None
    residual_threshold: Optional[float] = None
    epsilon_target: Optional[float] = None

    def __post_init__(self):
        if (
            self.max_iterations is None
            and self.residual_threshold is None
            and self.epsilon_target is None
        ):
            raise ValueError("stopping rule needs at least one criterion")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        for name in ("residual_threshold", "epsilon_target"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive")

    def threshold(self, gamma: float) -> Optional[float]:
        """Effective residual threshold; the tighter one if both are given."""
        candidates = []
        if self.residual_threshold is not None:
            candidates.append(self.residual_threshold)
        if self.epsilon_target is not None:
            candidates.append(stopping_threshold(self.epsilon_target, gamma))
        return min(candidates) if candidates else None


@dataclass
class SolveReport:
    policy: np.ndarray
    values: np.ndarray
    iterations: int
    converged: bool
    algorithm_name: str
    residual_history: list[float] = field(default_factory=list)
    policy_change_history: list[int] = field(default_factory=list)
    # VI: greedy policy per sweep (on request). PI: the policy sequence.
    policy_history: list[np.ndarray] = field(default_factory=list)
    objective_value: Optional[float] = None  # LP methods only


def _improvable(q_row, current):
    return q_row.min() < current - IMPROVEMENT_TOL * max(1.0, abs(current))


def value_iteration(
    mdp: Mdp,
    init=None,
    stop: Optional[StoppingRule] = None,
    track_policies: bool = False,
) -> SolveReport:
    """Successive approximation from ``init`` (zeros by default).

    Stops as soon as the Bellman residual drops below the rule's threshold, or
    after ``max_iterations`` sweeps. The returned policy is greedy with respect
    to the final vector. With ``track_policies`` the greedy policy of each
    iterate ``v_1, v_2, ...`` is kept in ``policy_history``.
    """
    if stop is None:
        stop = StoppingRule(epsilon_target=1e-6)
    threshold = stop.threshold(mdp.discount)
    v = np.zeros(mdp.n_states) if init is None else np.array(init, dtype=float)

    residuals: list[float] = []
    policies: list[np.ndarray] = []
    converged = False
    new_v, q = bellman_backup(mdp, v)
    n = 0
    while stop.max_iterations is None or n < stop.max_iterations:
        residual = bellman_residual(new_v, v)
        v = new_v
        n += 1
        residuals.append(residual)
        # The next sweep's q-table is also this iterate's greedy lookahead.
        new_v, q = bellman_backup(mdp, v)
        if track_policies:
            policies.append(np.argmin(q, axis=1))
        if threshold is not None and residual < threshold:
            converged = True
            break
    if threshold is None:
        converged = n > 0 and n == stop.max_iterations
    return SolveReport(
        policy=np.argmin(q, axis=1),
        values=v,
        iterations=n,
        converged=converged,
        algorithm_name="value_iteration",
        residual_history=residuals,
        policy_history=policies,
    )


def policy_iteration(mdp: Mdp, init=None) -> SolveReport:
    """Howard's algorithm: exact evaluation, then improve every improvable state.

    A state switches only if some action is strictly better than its current
    value; it then takes the smallest-index minimising action.
    ``policy_history`` holds the evaluated sequence ``pi_0, pi_1, ...``.
    """
    policy = _initial_policy(mdp, init)
    changes: list[int] = []
    history = [policy]
    n = 0
    while True:
        v = evaluate_policy(mdp, policy)
        _, q = bellman_backup(mdp, v)
        new_policy = policy.copy()
        for i in range(mdp.n_states):
            if _improvable(q[i], v[i]):
                new_policy[i] = int(np.argmin(q[i]))
        n += 1
        changed = int(np.count_nonzero(new_policy != policy))
        changes.append(changed)
        if not changed:
            break
        policy = new_policy
        history.append(policy)
    return SolveReport(
        policy=policy,
        values=v,
        iterations=n,
        converged=True,
        algorithm_name="policy_iteration",
        policy_change_history=changes,
        policy_history=history,
    )


def simple_policy_iteration(mdp: Mdp, init=None, max_switches: Optional[int] = None) -> SolveReport:
    """Sequential improvement: switch only the lowest-index improvable state.

    The policy is re-evaluated exactly after every switch, and the switched
    state takes its smallest-index strictly improving action. ``iterations``
    counts switches.
    """
    policy = _initial_policy(mdp, init)
    changes: list[int] = []
    switches = 0
    converged = False
    while max_switches is None or switches <= max_switches:
        v = evaluate_policy(mdp, policy)
        _, q = bellman_backup(mdp, v)
        target = next((i for i in range(mdp.n_states) if _improvable(q[i], v[i])), None)
        if target is None:
            changes.append(0)
            converged = True
            break
        if max_switches is not None and switches == max_switches:
            break
        margin = IMPROVEMENT_TOL * max(1.0, abs(v[target]))
        policy = policy.copy()
        policy[target] = int(np.flatnonzero(q[target] < v[target] - margin)[0])
        switches += 1
        changes.append(1)
    return SolveReport(
        policy=policy,
        values=v,
        iterations=switches,
        converged=converged,
        algorithm_name="simple_policy_iteration",
        policy_change_history=changes,
    )


def modified_policy_iteration(
    mdp: Mdp,
    init=None,
    sweeps: int = 5,
    residual_tol: float = MPI_RESIDUAL_TOL,
    max_iterations: int = MPI_MAX_ITERATIONS,
) -> SolveReport:
    """Policy iteration with evaluation replaced by ``sweeps`` fixed-policy backups.

    Values start at zero and are carried over between phases. Terminates when
    the improvement step leaves the policy unchanged and the Bellman residual
    of the current estimate is below ``residual_tol``.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    policy = _initial_policy(mdp, init)
    v = np.zeros(mdp.n_states)
    residuals: list[float] = []
    changes: list[int] = []
    converged = False
    n = 0
    while n < max_iterations:
        P_pi, c_pi = mdp.policy_matrix(policy)
        v = kernels.policy_sweeps(P_pi, c_pi, mdp.discount, v, sweeps)
        best, q = bellman_backup(mdp, v)
        rows = np.arange(mdp.n_states)
        current = q[rows, policy]
        new_policy = policy.copy()
        for i in range(mdp.n_states):
            if _improvable(q[i], current[i]):
                new_policy[i] = int(np.argmin(q[i]))
        residual = bellman_residual(best, v)
        n += 1
        residuals.append(residual)
        changed = int(np.count_nonzero(new_policy != policy))
        changes.append(changed)
        policy = new_policy
        if not changed and residual < residual_tol:
            converged = True
            break
    return SolveReport(
        policy=policy,
        values=v,
        iterations=n,
        converged=converged,
        algorithm_name="modified_policy_iteration",
        residual_history=residuals,
        policy_change_history=changes,
    )


def _initial_policy(mdp, init):
    if init is None:
        return np.zeros(mdp.n_states, dtype=np.intp)
    return as_policy(mdp, init).copy()
