"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--states 10,50,200]

Dense matrix-vector kernels (backup, policy_sweeps) lose to numpy's BLAS
once N reaches a few hundred; elimination and pivoting stay ahead.
"""
import argparse
import timeit

import numpy as np

from mdplab import kernels
from mdplab.families import random_mdp
from mdplab.lp import build_dual
from mdplab.simplex import solve_lp
from mdplab.solvers import StoppingRule, value_iteration


def cases(n_states, n_actions):
    mdp = random_mdp(n_states, n_actions, 0.95, seed=0)
    rng = np.random.default_rng(1)
    v = rng.normal(size=n_states)
    A = np.eye(n_states) - 0.95 * mdp.transitions[:, 0, :]
    b = mdp.costs[:, 0].copy()
    P_pi, c_pi = mdp.policy_matrix(np.zeros(n_states, dtype=int))
    small = random_mdp(12, 3, 0.9, seed=2)
    T = rng.normal(size=(n_states, 2 * n_states)) + 5.0

    def pivot():
        W = T.copy()
        for r in range(min(20, n_states)):
            kernels.pivot(W, r, r)

    return {
        "backup": lambda: kernels.backup(mdp.transitions, mdp.costs, 0.95, v),
        "policy_sweeps(20)": lambda: kernels.policy_sweeps(P_pi, c_pi, 0.95, v, 20),
        "gauss_solve": lambda: kernels.gauss_solve(A, b),
        "pivot x20": pivot,
        "value_iteration": lambda: value_iteration(
            mdp, stop=StoppingRule(residual_threshold=1e-6)
        ),
        "simplex (dual, 12x3)": lambda: solve_lp(build_dual(small)),
    }


def report(n_states, n_actions, repeat, backends):
    timings = {}
    for name in backends:
        kernels.use_backend(name)
        for label, fn in cases(n_states, n_actions).items():
            number = 1 if label in ("value_iteration", "simplex (dual, 12x3)") else 10
            timings[label, name] = min(timeit.repeat(fn, number=number, repeat=repeat)) / number

    print(f"\nN={n_states} M={n_actions}, best of {repeat} (ms per call)")
    header = f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for label in cases(4, 2):
        row = f"{label:<22}" + "".join(f"{1e3 * timings[label, b]:>12.3f}" for b in backends)
        if len(backends) > 1:
            row += f"{timings[label, 'python'] / timings[label, 'cython']:>9.1f}x"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--states", default="10,50,200", help="comma-separated state counts")
    parser.add_argument("--actions", type=int, default=4)
    args = parser.parse_args()

    backends = kernels.available_backends()
    for n_states in (int(x) for x in args.states.split(",")):
        report(n_states, args.actions, args.repeat, backends)
    if "cython" not in backends:
        print("compiled backend not built; only the python fallback was timed")


if __name__ == "__main__":
    main()
