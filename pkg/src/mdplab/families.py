"""Instance generators: the two worst-case families and seeded random MDPs.

Random instances use numpy's PCG64 generator (``numpy.random.default_rng``)
seeded with the integer ``seed``; draws happen in a fixed order, transitions
first and costs second, so a seed always yields the same MDP bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .mdp import Mdp


@dataclass(frozen=True)
class Mc90Instance:
    """Sequential-improvement worst case, decision/random/absorbing layout.

    State numbering: decision state ``i`` is ``i`` (``0 <= i < N/2``), random
    state ``i'`` is ``N/2 + i - 1`` (``1 <= i < N/2``), the absorbing state is
    ``N - 1``. Only decision states ``0 .. N/2-2`` have a real choice.
    """

    mdp: Mdp
    initial_policy: np.ndarray
    optimal_policy: np.ndarray
    predicted_switches: int
    state_labels: tuple[str, ...]

    @property
    def n_choice_states(self) -> int:
        return self.mdp.n_states // 2 - 1


def mc90_family(n: int, gamma: float = 0.95) -> Mc90Instance:
    if n % 2 or n < 6:
        raise ValueError(f"n must be an even integer >= 6, got {n}")
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    half = n // 2
    absorbing = n - 1

    def rand(i):
        return half + i - 1

    P = np.zeros((n, 2, n))
    C = np.zeros((n, 2))
    for i in range(half - 1):
        P[i, 0, i + 1] = 1.0
        P[i, 1, rand(i + 1)] = 1.0
    P[half - 1, :, absorbing] = 1.0
    C[half - 1, :] = 1.0
    for i in range(1, half - 1):
        P[rand(i), :, rand(i + 1)] = 0.5
        P[rand(i), :, i + 1] = 0.5
    P[rand(half - 1), :, absorbing] = 1.0
    P[absorbing, :, absorbing] = 1.0

    optimal = np.zeros(n, dtype=np.intp)
    optimal[half - 2] = 1
    labels = (
        tuple(f"d{i}" for i in range(half))
        + tuple(f"r{i}'" for i in range(1, half))
        + ("absorbing",)
    )
    return Mc90Instance(
        mdp=Mdp(P, C, gamma),
        initial_policy=np.zeros(n, dtype=np.intp),
        optimal_policy=optimal,
        predicted_switches=2 ** (half - 2),
        state_labels=labels,
    )


def vi_crossing_iteration(gamma: float) -> int:
    """Smallest ``n`` with ``gamma**n < 1 - gamma``."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    target = 1.0 - gamma
    n = max(0, math.floor(math.log(target) / math.log(gamma)) - 1)
    while gamma**n >= target:
        n += 1
    return n


@dataclass(frozen=True)
class ViLowerBoundInstance:
    """Three-state chain where value iteration keeps the wrong action.

    Action indices: 0 is the costly-forever branch to state 1, 1 the one-off
    payment to the absorbing state 2.
    """

    mdp: Mdp
    predicted_lower_bound: float
    exact_crossing: int


def vi_lower_bound_family(gamma: float) -> ViLowerBoundInstance:
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    P = np.zeros((3, 2, 3))
    C = np.zeros((3, 2))
    P[0, 0, 1] = 1.0
    P[0, 1, 2] = 1.0
    C[0, 1] = gamma**2 / (1.0 - gamma)
    P[1, :, 1] = 1.0
    C[1, :] = 1.0
    P[2, :, 2] = 1.0
    return ViLowerBoundInstance(
        mdp=Mdp(P, C, gamma),
        predicted_lower_bound=0.5 * math.log(1.0 / (1.0 - gamma)) / (1.0 - gamma),
        exact_crossing=vi_crossing_iteration(gamma),
    )


def random_mdp(n: int, m: int, gamma: float, seed: int) -> Mdp:
    """Transition rows are normalised uniform draws; costs are uniform on [0, 1)."""
    rng = np.random.default_rng(seed)
    weights = rng.random((n, m, n))
    # Guard against an all-zero row; with continuous draws this is a formality.
    weights[weights.sum(axis=2) == 0.0] = 1.0
    P = weights / weights.sum(axis=2, keepdims=True)
    C = rng.random((n, m))
    return Mdp(P, C, gamma)


def _bits(q: Fraction) -> int:
    return max(1, abs(q.numerator).bit_length() + q.denominator.bit_length())


def random_rational_mdp(n: int, m: int, gamma: float, seed: int, weight_bits: int = 3) -> Mdp:
    """Random MDP whose probabilities and costs are small exact rationals.

    Transition rows are integer weights in ``[1, 2**weight_bits]`` over their
    sum and costs are ``k / 2**weight_bits``. ``rational_bits`` records the
    largest numerator-plus-denominator bit length over all components.
    """
    rng = np.random.default_rng(seed)
    top = 2**weight_bits
    weights = rng.integers(1, top + 1, size=(n, m, n))
    numerators = rng.integers(0, top + 1, size=(n, m))
    probs = [
        [[Fraction(int(w), int(row.sum())) for w in row] for row in per_state]
        for per_state in weights
    ]
    costs = [[Fraction(int(k), top) for k in row] for row in numerators]
    bits = max(
        max(_bits(q) for s in probs for row in s for q in row),
        max(_bits(q) for row in costs for q in row),
    )
    P = np.array([[[float(q) for q in row] for row in s] for s in probs])
    # Float rounding can leave a row a few ulps off 1; fold it into the largest entry.
    sums = P.sum(axis=2)
    idx = P.argmax(axis=2)
    for i in range(n):
        for k in range(m):
            P[i, k, idx[i, k]] += 1.0 - sums[i, k]
    C = np.array([[float(q) for q in row] for row in costs])
    return Mdp(P, C, gamma, rational_bits=bits)
