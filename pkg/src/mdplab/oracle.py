"""Brute-force ground truth for small MDPs.

Every deterministic stationary policy is evaluated with a batched LAPACK
solve (deliberately not the package's own elimination kernel, so the oracle
does not share a code path with the solvers it checks).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .mdp import VALUE_TOL, Mdp, bellman_backup, evaluate_policy

DEFAULT_LIMIT = 10**6
_BATCH = 4096


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    optimal_values: np.ndarray
    optimal_policy: np.ndarray
    policies_examined: int


def _all_policies(n, m):
    it = itertools.product(range(m), repeat=n)
    while chunk := list(itertools.islice(it, _BATCH)):
        yield np.array(chunk, dtype=np.intp)


def _evaluate_batch(mdp, policies):
    rows = np.arange(mdp.n_states)
    P = mdp.transitions[rows, policies]            # (B, N, N)
    c = mdp.costs[rows, policies]                  # (B, N)
    A = np.eye(mdp.n_states) - mdp.discount * P
    return np.linalg.solve(A, c[..., None])[..., 0]


def brute_force_optimal(mdp: Mdp, limit: int = DEFAULT_LIMIT) -> OracleResult:
    """Enumerate all ``M**N`` policies in lexicographic order.

    Returns the pointwise minimum of their value vectors and the first policy
    (lexicographically) whose values attain it at every state within
    ``1e-9``. Raises ``RuntimeError`` if no single policy dominates, which
    would contradict the existence of a stationary optimal policy.
    """
    count = mdp.n_actions**mdp.n_states
    if count > limit:
        raise OracleLimitError(f"{count} policies exceeds the limit of {limit}")
    best = np.full(mdp.n_states, np.inf)
    for policies in _all_policies(mdp.n_states, mdp.n_actions):
        best = np.minimum(best, _evaluate_batch(mdp, policies).min(axis=0))
    # Second pass picks the witness, so the tie rule is independent of batching.
    for policies in _all_policies(mdp.n_states, mdp.n_actions):
        values = _evaluate_batch(mdp, policies)
        hits = np.flatnonzero((values <= best + VALUE_TOL).all(axis=1))
        if hits.size:
            return OracleResult(best, policies[hits[0]].copy(), count)
    raise RuntimeError("no single policy attains the pointwise minimum")


def verify_optimality_equations(mdp: Mdp, v, tol: float) -> bool:
    new_v, _ = bellman_backup(mdp, v)
    return bool(np.max(np.abs(new_v - np.asarray(v, dtype=float))) <= tol)


def optimality_gap(mdp: Mdp, policy, limit: int = DEFAULT_LIMIT, oracle: OracleResult | None = None) -> float:
    """Largest per-state excess cost of ``policy`` over the optimum."""
    if oracle is None:
        oracle = brute_force_optimal(mdp, limit)
    return float(np.max(evaluate_policy(mdp, policy) - oracle.optimal_values))


def is_epsilon_optimal(
    mdp: Mdp,
    policy,
    epsilon: float,
    limit: int = DEFAULT_LIMIT,
    oracle: OracleResult | None = None,
) -> bool:
    """True iff the policy is within ``epsilon`` of optimal at every state.

    Pass a precomputed ``oracle`` to avoid repeating the enumeration.
    """
    return optimality_gap(mdp, policy, limit, oracle) <= epsilon
