"""Tabular discounted MDPs: data model, policy evaluation, Bellman backup.

Conventions used across the package:

* costs are minimised;
* ``transitions[i, k, j]`` is the probability of moving from state ``i`` to
  ``j`` under action ``k``, ``costs[i, k]`` the instantaneous cost;
* a deterministic policy is an integer array of length ``n_states``; a
  stochastic policy an ``(n_states, n_actions)`` row-stochastic array;
* value vectors are float arrays of length ``n_states``;
* every argmin/argmax over actions resolves ties to the smallest index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels

ROW_SUM_TOL = 1e-12
VALUE_TOL = 1e-9


class InvalidMdpError(ValueError):
    """Raised when an MDP fails validation. ``violations`` lists each problem."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, order="C")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Mdp:
    """Finite MDP under the expected discounted cumulative cost criterion.

    Construction checks shapes only; use :func:`validate` (or :meth:`check`)
    for the probabilistic invariants so that malformed inputs can be reported
    rather than rejected outright.
    """

    transitions: np.ndarray
    costs: np.ndarray
    discount: float
    rational_bits: Optional[int] = None

    def __post_init__(self):
        P = _frozen(self.transitions)
        C = _frozen(self.costs)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ValueError(f"transitions must have shape (N, M, N), got {P.shape}")
        if C.shape != P.shape[:2]:
            raise ValueError(f"costs must have shape {P.shape[:2]}, got {C.shape}")
        if P.shape[0] < 1 or P.shape[1] < 1:
            raise ValueError("need at least one state and one action")
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "costs", C)
        object.__setattr__(self, "discount", float(self.discount))

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]

    def check(self) -> "Mdp":
        problems = validate(self)
        if problems:
            raise InvalidMdpError(problems)
        return self

    def policy_matrix(self, policy):
        """Transition matrix and cost vector of a deterministic policy."""
        policy = as_policy(self, policy)
        rows = np.arange(self.n_states)
        return self.transitions[rows, policy], self.costs[rows, policy]

    def __eq__(self, other):
        if not isinstance(other, Mdp):
            return NotImplemented
        return (
            self.discount == other.discount
            and self.rational_bits == other.rational_bits
            and np.array_equal(self.transitions, other.transitions)
            and np.array_equal(self.costs, other.costs)
        )

    __hash__ = None


def validate(mdp: Mdp) -> list[str]:
    """List every violated invariant; an empty list means the MDP is valid."""
    problems = []
    P, C = mdp.transitions, mdp.costs
    if not np.isfinite(P).all():
        problems.append("transitions: non-finite entries")
    for i, k in zip(*np.nonzero((P < 0).any(axis=2))):
        problems.append(f"transitions[{i},{k}]: negative probability")
    sums = P.sum(axis=2)
    for i, k in zip(*np.nonzero(~(np.abs(sums - 1.0) <= ROW_SUM_TOL))):
        problems.append(f"transitions[{i},{k}]: row sums to {sums[i, k]!r}, not 1")
    for i, k in zip(*np.nonzero(~np.isfinite(C))):
        problems.append(f"costs[{i},{k}]: not finite")
    if not (0.0 < mdp.discount < 1.0):
        problems.append(f"discount: {mdp.discount!r} outside (0, 1)")
    if mdp.rational_bits is not None and mdp.rational_bits < 1:
        problems.append("rational_bits: must be a positive integer")
    return problems


def as_policy(mdp: Mdp, policy) -> np.ndarray:
    policy = np.asarray(policy, dtype=np.intp)
    if policy.shape != (mdp.n_states,):
        raise ValueError(f"policy must have length {mdp.n_states}")
    if ((policy < 0) | (policy >= mdp.n_actions)).any():
        raise ValueError(f"policy actions must lie in [0, {mdp.n_actions})")
    return policy


def as_stochastic_policy(mdp: Mdp, probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (mdp.n_states, mdp.n_actions):
        raise ValueError("stochastic policy must have shape (N, M)")
    if (probs < 0).any() or (np.abs(probs.sum(axis=1) - 1.0) > ROW_SUM_TOL).any():
        raise ValueError("stochastic policy rows must be distributions")
    return probs


def evaluate_policy(mdp: Mdp, policy) -> np.ndarray:
    """Total discounted cost of a deterministic policy from every state.

    Solves ``(I - gamma P_pi) v = c_pi`` by Gaussian elimination with partial
    pivoting. Raises :class:`~mdplab.kernels.SingularSystemError` if a pivot
    falls below ``1e-12``, which a valid MDP cannot produce.
    """
    P_pi, c_pi = mdp.policy_matrix(policy)
    A = np.eye(mdp.n_states) - mdp.discount * P_pi
    return kernels.gauss_solve(A, c_pi)


def evaluate_stochastic_policy(mdp: Mdp, probs) -> np.ndarray:
    """Total discounted cost of a stationary stochastic policy."""
    probs = as_stochastic_policy(mdp, probs)
    P_pi = np.einsum("ik,ikj->ij", probs, mdp.transitions)
    c_pi = (probs * mdp.costs).sum(axis=1)
    return kernels.gauss_solve(np.eye(mdp.n_states) - mdp.discount * P_pi, c_pi)


def bellman_backup(mdp: Mdp, v) -> tuple[np.ndarray, np.ndarray]:
    """One-step lookahead ``q[i,k] = c[i,k] + gamma sum_j p[i,k,j] v[j]``.

    Returns the new value vector (row minima of ``q``) and ``q`` itself.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (mdp.n_states,):
        raise ValueError(f"value vector must have length {mdp.n_states}")
    return kernels.backup(mdp.transitions, mdp.costs, mdp.discount, v)


def greedy_policy(mdp: Mdp, v) -> np.ndarray:
    _, q = bellman_backup(mdp, v)
    return np.argmin(q, axis=1)


def bellman_residual(v_new, v_old) -> float:
    v_new = np.asarray(v_new, dtype=float)
    v_old = np.asarray(v_old, dtype=float)
    if v_new.shape != v_old.shape:
        raise ValueError(f"length mismatch: {v_new.shape} vs {v_old.shape}")
    if v_new.size == 0:
        return 0.0
    return float(np.max(np.abs(v_new - v_old)))


def max_abs_cost(mdp: Mdp) -> float:
    return float(np.max(np.abs(mdp.costs)))


def value_range_bound(mdp: Mdp) -> float:
    """Bound ``C_max / (1 - gamma)`` on |value| for any policy and state."""
    return max_abs_cost(mdp) / (1.0 - mdp.discount)
