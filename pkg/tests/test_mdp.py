import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdplab.families import random_mdp
from mdplab.mdp import (
    InvalidMdpError,
    Mdp,
    bellman_backup,
    bellman_residual,
    evaluate_policy,
    greedy_policy,
    validate,
    value_range_bound,
)

from conftest import make_toy2


class TestValidate:
    def test_well_formed(self, toy2):
        assert validate(toy2) == []

    def test_row_sum(self, toy2):
        P = toy2.transitions.copy()
        P[0, 0] = [0.9, 0.0]
        report = validate(Mdp(P, toy2.costs, 0.5))
        assert len(report) == 1 and "[0,0]" in report[0]

    def test_discount_open_interval(self, toy2):
        report = validate(Mdp(toy2.transitions, toy2.costs, 1.0))
        assert any(r.startswith("discount") for r in report)

    def test_negative_and_nonfinite(self, toy2):
        P = toy2.transitions.copy()
        P[1, 1] = [-0.5, 1.5]
        C = toy2.costs.copy()
        C[1, 0] = np.inf
        report = validate(Mdp(P, C, 0.5))
        assert any("[1,1]: negative" in r for r in report)
        assert any(r.startswith("costs[1,0]") for r in report)

    def test_check_raises(self, toy2):
        with pytest.raises(InvalidMdpError) as err:
            Mdp(toy2.transitions, toy2.costs, 0.0).check()
        assert err.value.violations

    def test_shape_errors(self):
        with pytest.raises(ValueError):
            Mdp(np.ones((2, 2, 3)), np.ones((2, 2)), 0.5)
        with pytest.raises(ValueError):
            Mdp(np.ones((2, 2, 2)) / 2, np.ones((2, 3)), 0.5)

    def test_immutable(self, toy2):
        with pytest.raises(ValueError):
            toy2.costs[0, 0] = 3.0


class TestEvaluatePolicy:
    def test_toy2_geometric_series(self, toy2):
        # 1.5 / (1 - 0.5) and 2 / (1 - 0.5)
        np.testing.assert_allclose(evaluate_policy(toy2, [0, 0]), [3.0, 4.0], atol=1e-12)

    def test_tiny_discount(self):
        mdp = random_mdp(4, 3, 0.5, seed=2)
        tiny = Mdp(mdp.transitions, mdp.costs, 1e-12)
        policy = [2, 0, 1, 1]
        np.testing.assert_allclose(
            evaluate_policy(tiny, policy), mdp.costs[np.arange(4), policy], atol=1e-11
        )

    def test_zero_costs(self, zero_cost):
        np.testing.assert_array_equal(evaluate_policy(zero_cost, [1, 0, 1]), np.zeros(3))

    def test_bad_policy(self, toy2):
        with pytest.raises(ValueError):
            evaluate_policy(toy2, [0, 2])
        with pytest.raises(ValueError):
            evaluate_policy(toy2, [0])


class TestBackup:
    def test_toy2_from_zero(self, toy2):
        values, q = bellman_backup(toy2, [0.0, 0.0])
        np.testing.assert_array_equal(values, [0.0, 2.0])
        np.testing.assert_array_equal(q, [[1.5, 0.0], [2.0, 2.0]])

    def test_zero_fixed_point(self, zero_cost):
        values, q = bellman_backup(zero_cost, np.zeros(3))
        assert not values.any() and not q.any()

    def test_toy2_fixed_point(self, toy2):
        values, _ = bellman_backup(toy2, [2.0, 4.0])
        np.testing.assert_array_equal(values, [2.0, 4.0])

    def test_length_checked(self, toy2):
        with pytest.raises(ValueError):
            bellman_backup(toy2, [0.0])


class TestGreedy:
    def test_toy2(self, toy2):
        # q(0, .) = (2.5, 2), q(1, .) = (4, 4) tie -> 0
        np.testing.assert_array_equal(greedy_policy(toy2, [2.0, 4.0]), [1, 0])

    def test_zero_values_pick_cheapest(self):
        mdp = random_mdp(5, 3, 0.9, seed=4)
        np.testing.assert_array_equal(greedy_policy(mdp, np.zeros(5)), mdp.costs.argmin(axis=1))

    def test_all_equal_picks_zero(self):
        P = np.full((2, 3, 2), 0.5)
        mdp = Mdp(P, np.ones((2, 3)), 0.9)
        np.testing.assert_array_equal(greedy_policy(mdp, [1.0, 1.0]), [0, 0])


class TestResidualAndRange:
    @pytest.mark.parametrize(
        "new, old, expected",
        [((0, 2), (0, 0), 2.0), ((1.5, -2.0), (1.5, -2.0), 0.0), ((1, -3), (2, 1), 4.0)],
    )
    def test_residual(self, new, old, expected):
        assert bellman_residual(new, old) == expected

    def test_residual_length_mismatch(self):
        with pytest.raises(ValueError):
            bellman_residual([1.0], [1.0, 2.0])

    def test_range_toy2(self, toy2):
        assert value_range_bound(toy2) == 4.0

    def test_range_zero(self, zero_cost):
        assert value_range_bound(zero_cost) == 0.0

    def test_range_formula(self):
        P = np.ones((1, 2, 1))
        mdp = Mdp(P, [[-1.0, 0.5]], 0.9)
        assert value_range_bound(mdp) == pytest.approx(10.0)


# -- properties ---------------------------------------------------------------

mdp_params = st.tuples(
    st.integers(1, 6), st.integers(1, 3), st.floats(0.05, 0.99), st.integers(0, 10**6)
)


@settings(max_examples=60, deadline=None)
@given(mdp_params, st.integers(0, 10**6))
def test_backup_contracts(params, seed):
    n, m, gamma, mdp_seed = params
    mdp = random_mdp(n, m, gamma, mdp_seed)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(scale=10, size=(2, n))
    tu, _ = bellman_backup(mdp, u)
    tv, _ = bellman_backup(mdp, v)
    assert np.max(np.abs(tv - tu)) <= gamma * np.max(np.abs(v - u)) + 1e-12


@settings(max_examples=60, deadline=None)
@given(mdp_params, st.integers(0, 10**6))
def test_evaluation_satisfies_policy_equation(params, seed):
    n, m, gamma, mdp_seed = params
    mdp = random_mdp(n, m, gamma, mdp_seed)
    policy = np.random.default_rng(seed).integers(0, m, size=n)
    v = evaluate_policy(mdp, policy)
    P_pi, c_pi = mdp.policy_matrix(policy)
    assert np.max(np.abs(c_pi + gamma * P_pi @ v - v)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(mdp_params)
def test_value_range_and_greedy_determinism(params):
    n, m, gamma, mdp_seed = params
    mdp = random_mdp(n, m, gamma, mdp_seed)
    rng = np.random.default_rng(mdp_seed)
    bound = value_range_bound(mdp)
    for _ in range(50):
        policy = rng.integers(0, m, size=n)
        assert np.max(np.abs(evaluate_policy(mdp, policy))) <= bound + 1e-9
    v = rng.normal(size=n)
    np.testing.assert_array_equal(greedy_policy(mdp, v), greedy_policy(mdp, v.copy()))


def test_fixed_point_tolerance_scaling():
    mdp = make_toy2(0.5)
    tol = 1e-6
    v = np.array([2.0, 4.0]) + tol
    out, _ = bellman_backup(mdp, v)
    assert np.max(np.abs(out - v)) <= tol / (1 - mdp.discount)
