import numpy as np
import pytest

from amsfl.harness import _random_hetero_instance
from amsfl.scheduler import (
    CostModel,
    InfeasibleBudgetError,
    ScheduleParams,
    SearchSpaceError,
    brute_force_schedule,
    continuous_allocation,
    error_cost,
    greedy_schedule,
    uniform_plan,
)
from oracles import enumerate_maximal_plans, grid_minimize_on_budget, reciprocal_error, weighted_quadratic

UNIT = ScheduleParams(alpha=1.0, beta=1.0)


class TestErrorCost:
    def test_quadratic_term_vanishes_at_one_step(self):
        assert error_cost([1, 1], [0.3, 0.7], UNIT) == pytest.approx(1.0)

    def test_two_steps_each(self):
        assert error_cost([2, 2], [0.5, 0.5], UNIT) == pytest.approx(3.0)

    def test_beta_zero_reduces_to_linear(self):
        p = ScheduleParams(alpha=2.0, beta=0.0)
        assert error_cost([3, 5], [0.5, 0.5], p) == pytest.approx(2.0 * 4.0)

    def test_rejects_zero_steps(self):
        with pytest.raises(ValueError):
            error_cost([0, 1], [0.5, 0.5], UNIT)


class TestCostModel:
    def test_infeasible_minimum_plan(self):
        with pytest.raises(InfeasibleBudgetError):
            CostModel((2.0, 2.0), (1.0, 1.0), 5.0)

    def test_time_and_maximality(self):
        cm = CostModel((1.0, 2.0), (0.5, 0.5), 8.0)
        assert cm.time_of([2, 2]) == pytest.approx(7.0)
        assert cm.feasible([2, 2])
        assert not cm.maximal([2, 2])  # one more cheap step still fits
        assert cm.maximal([3, 2])


class TestGreedy:
    def test_worked_instance(self):
        cm = CostModel((1.0, 2.0), (0.0, 0.0), 6.0)
        plan = greedy_schedule(cm, [0.5, 0.5], UNIT)
        assert plan.steps == (2, 2)
        assert plan.total_time == pytest.approx(6.0)
        assert plan.objective_value == pytest.approx(3.0)

    def test_worked_instance_midpoint_marginal(self):
        # the as-printed trapezoidal rate reaches the same answer here
        cm = CostModel((1.0, 2.0), (0.0, 0.0), 6.0)
        plan = greedy_schedule(cm, [0.5, 0.5], UNIT, marginal="midpoint")
        assert plan.steps == (2, 2)

    def test_no_slack_gives_minimum_plan(self):
        cm = CostModel((1.0, 2.0), (0.5, 0.5), 4.0)
        assert greedy_schedule(cm, [0.5, 0.5], UNIT).steps == (1, 1)

    def test_single_client_fills_budget(self):
        cm = CostModel((1.0,), (0.0,), 5.0)
        assert greedy_schedule(cm, [1.0], UNIT).steps == (5,)

    def test_pure_min_mode(self):
        cm = CostModel((1.0, 2.0), (0.0, 0.0), 6.0)
        assert greedy_schedule(cm, [0.5, 0.5], UNIT, mode="min").steps == (1, 1)

    def test_feasible_and_maximal_always(self):
        rng = np.random.default_rng(21)
        done = 0
        while done < 300:
            inst = _random_hetero_instance(rng)
            if inst is None:
                continue
            cm, w, p = inst
            plan = greedy_schedule(cm, w, p)
            assert cm.feasible(plan.steps)
            assert cm.maximal(plan.steps)
            done += 1

    def test_scale_invariance(self):
        rng = np.random.default_rng(22)
        done = 0
        while done < 50:
            inst = _random_hetero_instance(rng)
            if inst is None:
                continue
            cm, w, p = inst
            base = greedy_schedule(cm, w, p).steps
            for scale in (0.25, 32.0):
                scaled = ScheduleParams(alpha=p.alpha * scale, beta=p.beta * scale)
                assert greedy_schedule(cm, w, scaled).steps == base
            done += 1

    def test_comm_delay_only_shifts_feasibility(self):
        # b_i never enters the pick ratio: same plans with b folded into S
        rng = np.random.default_rng(23)
        done = 0
        while done < 50:
            inst = _random_hetero_instance(rng)
            if inst is None:
                continue
            cm, w, p = inst
            folded = CostModel(cm.step_costs, (0.0,) * cm.n, cm.budget - cm.comm_total)
            assert greedy_schedule(cm, w, p).steps == greedy_schedule(folded, w, p).steps
            done += 1

    def test_known_boundary_near_equal_rates(self):
        """Outside the operating envelope the greedy can cost more than the
        uniform plan: with near-identical marginal-rate curves the balanced
        plan wins by integer lumpiness.  This pins the documented boundary."""
        cm = CostModel((0.744, 0.904), (0.396, 0.092), 7.543)
        w = [0.519, 0.481]
        p = ScheduleParams(alpha=4.623, beta=4.473)
        g = greedy_schedule(cm, w, p)
        u = uniform_plan(cm, w, p)
        assert g.steps == (3, 5)
        assert u.steps == (4, 4)
        assert g.objective_value > u.objective_value


class TestBruteForce:
    def test_worked_instance_enumeration(self):
        cm = CostModel((1.0, 2.0), (0.0, 0.0), 6.0)
        plans = enumerate_maximal_plans(cm.step_costs, cm.comm_delays, cm.budget)
        assert sorted(plans) == [(2, 2), (4, 1)]
        assert brute_force_schedule(cm, [0.5, 0.5], UNIT).steps == (2, 2)
        # (2,2) at cost 3.0 beats (4,1) at cost 5.5
        assert error_cost((4, 1), [0.5, 0.5], UNIT) == pytest.approx(5.5)

    def test_no_slack_unique_plan(self):
        cm = CostModel((1.0, 2.0), (0.5, 0.5), 4.0)
        assert brute_force_schedule(cm, [0.5, 0.5], UNIT).steps == (1, 1)

    def test_balanced_on_symmetric_instances(self):
        cm = CostModel((1.0, 1.0, 1.0), (0.0, 0.0, 0.0), 8.0)
        plan = brute_force_schedule(cm, [1 / 3, 1 / 3, 1 / 3], UNIT)
        assert max(plan.steps) - min(plan.steps) <= 1

    def test_matches_independent_enumeration(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            n = int(rng.integers(2, 4))
            c = tuple(float(x) for x in rng.uniform(0.4, 1.5, n))
            b = tuple(float(x) for x in rng.uniform(0.0, 0.3, n))
            budget = float(sum(c) + sum(b) + rng.uniform(0.5, 4.0))
            cm = CostModel(c, b, budget)
            w = rng.dirichlet(np.full(n, 3.0))
            p = ScheduleParams(alpha=float(rng.uniform(0.1, 3)), beta=float(rng.uniform(0.1, 3)))
            plans = enumerate_maximal_plans(c, b, budget)
            expected = min(plans, key=lambda t: (error_cost(t, w, p), t))
            got = brute_force_schedule(cm, w, p)
            assert got.steps == expected
            assert cm.maximal(got.steps)

    def test_search_space_guards(self):
        with pytest.raises(SearchSpaceError):
            brute_force_schedule(CostModel((1.0,) * 7, (0.0,) * 7, 10.0), [1 / 7] * 7, UNIT)
        with pytest.raises(SearchSpaceError):
            brute_force_schedule(CostModel((0.01,), (0.0,), 10.0), [1.0], UNIT)


class TestGreedyVsOracle:
    def test_uniform_costs_exact(self):
        """Equal step costs make the greedy provably optimal; check objective
        equality against the enumeration oracle."""
        rng = np.random.default_rng(41)
        done = 0
        while done < 120:
            n = int(rng.integers(2, 5))
            c = float(rng.uniform(0.5, 2.0))
            budget = c * n * float(rng.uniform(1.0, 12 / n))
            try:
                cm = CostModel((c,) * n, (0.0,) * n, budget)
            except InfeasibleBudgetError:
                continue
            w = rng.dirichlet(np.full(n, 4.0))
            p = ScheduleParams(alpha=float(rng.uniform(0.05, 5)), beta=float(rng.uniform(0.05, 5)))
            g = greedy_schedule(cm, w, p)
            bf = brute_force_schedule(cm, w, p)
            assert g.objective_value == pytest.approx(bf.objective_value, abs=1e-9)
            done += 1

    def test_never_worse_than_uniform_in_envelope(self):
        rng = np.random.default_rng(42)
        done = 0
        while done < 300:
            inst = _random_hetero_instance(rng)
            if inst is None:
                continue
            cm, w, p = inst
            g = greedy_schedule(cm, w, p)
            u = uniform_plan(cm, w, p)
            assert g.objective_value <= u.objective_value + 1e-9
            done += 1


class TestContinuousAllocation:
    def test_inverse_sqrt_cost_ratio(self):
        t = continuous_allocation([1.0, 4.0], [0.5, 0.5], 12.0)
        assert t[0] / t[1] == pytest.approx(2.0)
        assert np.dot([1.0, 4.0], t) == pytest.approx(12.0)

    def test_symmetric_instance(self):
        t = continuous_allocation([2.0, 2.0, 2.0], [1 / 3] * 3, 9.0)
        np.testing.assert_allclose(t, t[0])

    def test_weight_skew(self):
        t = continuous_allocation([1.0, 1.0], [0.8, 0.2], 5.0)
        assert t[0] / t[1] == pytest.approx(0.5)

    def test_zero_budget_rejected(self):
        with pytest.raises(ValueError):
            continuous_allocation([1.0], [1.0], 0.0)

    def test_matches_grid_search_on_reciprocal_error(self):
        rng = np.random.default_rng(51)
        for _ in range(5):
            n = int(rng.integers(2, 4))
            c = rng.uniform(0.3, 3.0, n)
            w = rng.dirichlet(np.full(n, 3.0))
            budget = float(rng.uniform(5.0, 20.0))
            closed = continuous_allocation(c, w, budget)
            grid = grid_minimize_on_budget(reciprocal_error(w), c, budget)
            np.testing.assert_allclose(closed / closed[0], grid / grid[0], rtol=1e-6)

    def test_literal_quadratic_minimizer_is_cost_proportional(self):
        """Diagnostic pin: the budget-constrained minimizer of the *quadratic*
        cost sum (beta w_i/2) t_i^2 is t_i ~ c_i / w_i, not the sqrt law, so
        the sqrt law corresponds to the reciprocal-error model instead."""
        c = np.array([1.0, 4.0])
        w = np.array([0.5, 0.5])
        grid = grid_minimize_on_budget(weighted_quadratic(w), c, 17.0)
        np.testing.assert_allclose(grid[0] / grid[1], c[0] / c[1], rtol=1e-5)
