import numpy as np
import pytest

from mdplab.families import random_mdp
from mdplab.lp import (
    LpParseError,
    LpProgram,
    build_dual,
    build_primal,
    dual_to_stochastic_policy,
    export_lp,
    parse_lp,
    policy_basis_solution,
    stochastic_to_deterministic,
)
from mdplab.mdp import evaluate_policy
from mdplab.oracle import brute_force_optimal
from mdplab.simplex import EQ, GE, LE, MAXIMIZE, MINIMIZE, solve_lp


def _lp(sense, objective, constraints, bounds=None):
    n = len(objective)
    return LpProgram(
        sense=sense,
        objective=tuple(objective),
        constraints=tuple((tuple(r), rel, rhs) for r, rel, rhs in constraints),
        bounds=tuple(bounds or [(0.0, None)] * n),
        variable_labels=tuple(f"x{j}" for j in range(n)),
        constraint_labels=tuple(f"c{i}" for i in range(len(constraints))),
    )


class TestBuild:
    def test_primal_toy2(self, toy2):
        lp = build_primal(toy2)
        assert (lp.n_variables, lp.n_constraints) == (2, 4)
        row, rel, rhs = lp.constraints[0]
        assert row == (0.5, 0.0) and rel == LE and rhs == 1.5
        assert lp.sense == MAXIMIZE
        assert all(b == (None, None) for b in lp.bounds)

    def test_primal_size(self):
        lp = build_primal(random_mdp(3, 2, 0.9, 0))
        assert (lp.n_variables, lp.n_constraints) == (3, 6)

    def test_dual_toy2(self, toy2):
        lp = build_dual(toy2)
        assert (lp.n_variables, lp.n_constraints) == (4, 2)
        # flow_1: x_1_0 + x_1_1 - 0.5 (x_0_1 + x_1_0 + x_1_1) = 1
        row, rel, rhs = lp.constraints[1]
        assert row == (0.0, -0.5, 0.5, 0.5) and rel == EQ and rhs == 1.0
        assert lp.variable_labels == ("x_0_0", "x_0_1", "x_1_0", "x_1_1")
        assert all(b == (0.0, None) for b in lp.bounds)

    def test_zero_cost_rhs(self, zero_cost):
        lp = build_primal(zero_cost)
        assert all(rhs == 0.0 for _, _, rhs in lp.constraints)
        assert solve_lp(lp).objective_value == pytest.approx(0.0, abs=1e-12)
        assert solve_lp(build_dual(zero_cost)).objective_value == pytest.approx(0.0, abs=1e-12)

    def test_program_validation(self):
        with pytest.raises(ValueError):
            _lp(MAXIMIZE, [1.0, 1.0], [([1.0], LE, 1.0)])
        with pytest.raises(ValueError):
            _lp(MAXIMIZE, [1.0], [([1.0], "<>", 1.0)])
        with pytest.raises(ValueError):
            _lp(MAXIMIZE, [1.0], [([float("nan")], LE, 1.0)])


class TestSimplex:
    def test_primal_toy2(self, toy2):
        sol = solve_lp(build_primal(toy2))
        assert sol.status == "optimal"
        np.testing.assert_allclose(sol.values, [2.0, 4.0], atol=1e-9)
        assert sol.objective_value == pytest.approx(6.0)

    def test_dual_toy2(self, toy2):
        sol = solve_lp(build_dual(toy2))
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(6.0)
        np.testing.assert_allclose(sol.values, [0.0, 1.0, 3.0, 0.0], atol=1e-9)

    def test_infeasible(self):
        lp = _lp(MAXIMIZE, [1.0], [([1.0], LE, -1.0)])
        assert solve_lp(lp).status == "infeasible"

    def test_unbounded(self):
        lp = _lp(MAXIMIZE, [1.0, 1.0], [([1.0, -1.0], LE, 1.0)])
        assert solve_lp(lp).status == "unbounded"

    def test_mixed_relations_and_bounds(self):
        # min x0 + 2 x1, x0 + x1 >= 3, x0 - x1 = 1, -5 <= x0 <= 1.5, x1 free
        lp = _lp(
            MINIMIZE,
            [1.0, 2.0],
            [([1.0, 1.0], GE, 3.0), ([1.0, -1.0], EQ, 1.0)],
            bounds=[(-5.0, 1.5), (None, None)],
        )
        assert solve_lp(lp).status == "infeasible"
        lp = _lp(
            MINIMIZE,
            [1.0, 2.0],
            [([1.0, 1.0], GE, 3.0), ([1.0, -1.0], EQ, 1.0)],
            bounds=[(-5.0, 4.0), (None, None)],
        )
        sol = solve_lp(lp)
        np.testing.assert_allclose(sol.values, [2.0, 1.0], atol=1e-9)
        assert sol.objective_value == pytest.approx(4.0)

    def test_degenerate_cycling_example(self):
        # Beale's example cycles under the textbook largest-coefficient rule
        lp = _lp(
            MINIMIZE,
            [-0.75, 150.0, -0.02, 6.0],
            [
                ([0.25, -60.0, -0.04, 9.0], LE, 0.0),
                ([0.5, -90.0, -0.02, 3.0], LE, 0.0),
                ([0.0, 0.0, 1.0, 0.0], LE, 1.0),
            ],
        )
        sol = solve_lp(lp, rule="bland")
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(-0.05)

    @pytest.mark.parametrize("seed", range(5))
    def test_rules_agree(self, seed):
        mdp = random_mdp(4, 3, 0.9, seed)
        a = solve_lp(build_dual(mdp), rule="bland")
        b = solve_lp(build_dual(mdp), rule="dantzig")
        assert a.objective_value == pytest.approx(b.objective_value, rel=1e-9)

    def test_unknown_rule(self, toy2):
        with pytest.raises(ValueError):
            solve_lp(build_primal(toy2), rule="steepest")

    @pytest.mark.parametrize("seed", range(10))
    def test_strong_duality_and_oracle(self, seed):
        mdp = random_mdp(5, 2, 0.9, seed)
        primal = solve_lp(build_primal(mdp))
        dual = solve_lp(build_dual(mdp))
        oracle = brute_force_optimal(mdp)
        np.testing.assert_allclose(primal.values, oracle.optimal_values, atol=1e-8)
        assert abs(primal.objective_value - dual.objective_value) <= 1e-6 * (
            1 + abs(primal.objective_value)
        )


class TestPolicyExtraction:
    @pytest.mark.parametrize(
        "flows, probs", [((0.0, 1.0), (0.0, 1.0)), ((0.5, 0.5), (0.5, 0.5))]
    )
    def test_stochastic(self, toy2, flows, probs):
        out = dual_to_stochastic_policy(toy2, list(flows) + [1.0, 1.0])
        np.testing.assert_allclose(out[0], probs)

    def test_stochastic_rejects_empty_state(self, toy2):
        with pytest.raises(ValueError):
            dual_to_stochastic_policy(toy2, [0.0, 0.0, 1.0, 1.0])

    def test_stochastic_rejects_negative(self, toy2):
        with pytest.raises(ValueError):
            dual_to_stochastic_policy(toy2, [-0.1, 1.0, 1.0, 1.0])

    @pytest.mark.parametrize(
        "flows, action", [((0.0, 1.0), 1), ((0.4, 0.4), 0), ((0.2, 0.8), 1)]
    )
    def test_deterministic(self, flows, action):
        assert stochastic_to_deterministic([flows])[0] == action

    def test_deterministic_flat_needs_width(self):
        np.testing.assert_array_equal(stochastic_to_deterministic([0, 1, 2, 1], 2), [1, 0])
        with pytest.raises(ValueError):
            stochastic_to_deterministic([0, 1, 2, 1])

    def test_toy2_dual_extraction(self, toy2):
        sol = solve_lp(build_dual(toy2))
        probs = dual_to_stochastic_policy(toy2, sol.values)
        np.testing.assert_allclose(probs[0], [0.0, 1.0], atol=1e-12)


class TestBasis:
    @pytest.mark.parametrize("policy, values", [([0, 0], [3.0, 4.0]), ([1, 0], [2.0, 4.0])])
    def test_toy2(self, toy2, policy, values):
        np.testing.assert_allclose(policy_basis_solution(toy2, policy), values, atol=1e-12)

    def test_zero_cost(self, zero_cost):
        np.testing.assert_array_equal(policy_basis_solution(zero_cost, [1, 1, 0]), np.zeros(3))

    def test_matches_evaluation(self):
        mdp = random_mdp(6, 3, 0.95, 12)
        rng = np.random.default_rng(0)
        for _ in range(10):
            policy = rng.integers(0, 3, size=6)
            np.testing.assert_allclose(
                policy_basis_solution(mdp, policy), evaluate_policy(mdp, policy), atol=1e-9
            )


class TestExport:
    def test_primal_text(self, toy2):
        text = export_lp(build_primal(toy2))
        assert "Maximize" in text
        assert sum(line.strip().startswith("bellman_") for line in text.splitlines()) == 4
        assert "free" in text

    def test_dual_text(self, toy2):
        text = export_lp(build_dual(toy2))
        assert "Minimize" in text
        assert sum(" >= 0" in line for line in text.splitlines()) == 4

    @pytest.mark.parametrize("which", [build_primal, build_dual])
    def test_round_trip(self, which):
        lp = which(random_mdp(3, 2, 0.9, 4))
        assert parse_lp(export_lp(lp)) == lp

    def test_round_trip_bounds(self):
        lp = _lp(
            MINIMIZE,
            [1.0, -2.0, 0.0],
            [([1.0, 1.0, 1.0], GE, -3.0)],
            bounds=[(-1.0, 2.0), (None, 4.0), (None, None)],
        )
        assert parse_lp(export_lp(lp)) == lp

    def test_parse_errors(self):
        with pytest.raises(LpParseError):
            parse_lp("Subject To\n c0: x >= 1\nEnd\n")
        with pytest.raises(LpParseError):
            parse_lp("Maximize\n obj: x\nSubject To\n c0: x ?? 1\nEnd\n")
