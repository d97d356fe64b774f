import numpy as np
import pytest

from amsfl.federation import (
    BoundReport,
    ClientState,
    DivergenceError,
    PlainSGDStrategy,
    aggregate,
    error_identity_check,
    fixed_schedule,
    local_multistep_sgd,
    recursion_bound_report,
    residual_limit,
    round_duration,
    run_rounds,
)
from amsfl.objectives import Quadratic


def quad_1d(target=3.0, curvature=1.0):
    return Quadratic.centered(np.array([[curvature]]), np.array([target]))


def single_client(obj=None, weight=1.0):
    return ClientState("c0", weight, obj if obj is not None else quad_1d())


class TestLocalSgd:
    def test_hand_iteration(self):
        # F = (w-3)^2/2 from 0 with eta 0.1: w1 = 0.3, w2 = 0.57
        w, drift = local_multistep_sgd(single_client(), np.zeros(1), 2, 0.1)
        np.testing.assert_allclose(w, [0.57])
        np.testing.assert_allclose(drift.per_step[0], [0.0])
        np.testing.assert_allclose(drift.per_step[1], [0.3])
        np.testing.assert_allclose(drift.cumulative, [0.3])

    def test_single_step(self):
        obj = quad_1d()
        w, drift = local_multistep_sgd(single_client(obj), np.zeros(1), 1, 0.1)
        np.testing.assert_allclose(w, -0.1 * obj.gradient(np.zeros(1)))
        assert drift.steps == 1
        np.testing.assert_array_equal(drift.per_step[0], np.zeros(1))

    def test_zero_eta_is_identity(self):
        w, _ = local_multistep_sgd(single_client(), np.array([5.0]), 3, 0.0)
        np.testing.assert_array_equal(w, [5.0])

    def test_divergence_guard(self):
        client = single_client(quad_1d(curvature=1.0))
        with pytest.raises(DivergenceError):
            local_multistep_sgd(client, np.array([1e9]), 50, 3.0)


class TestAggregate:
    def test_convex_combination(self):
        out = aggregate([(0.25, np.array([2.0])), (0.75, np.array([4.0]))])
        np.testing.assert_allclose(out, [3.5])

    def test_single_client(self):
        np.testing.assert_allclose(aggregate([(1.0, np.array([1.0, 2.0]))]), [1.0, 2.0])

    def test_idempotent_on_identical_models(self):
        m = np.array([1.5, -2.0])
        out = aggregate([(0.5, m), (0.5, m)])
        np.testing.assert_allclose(out, m)

    def test_weight_sum_violation(self):
        with pytest.raises(ValueError):
            aggregate([(0.5, np.zeros(1)), (0.6, np.zeros(1))])


def one_round_trace(eta=0.1, t=2):
    client = single_client()
    history = run_rounds(
        [client], np.zeros(1), eta, PlainSGDStrategy(), fixed_schedule(t),
        rounds=1, w_star=np.array([3.0]),
    )
    return history.traces[0]


class TestErrorIdentity:
    def test_single_client_walkthrough(self):
        trace = one_round_trace()
        np.testing.assert_allclose(trace.e_end, [-2.43])
        assert error_identity_check(trace, 0.1) <= 1e-12

    def test_single_step_reduces_to_plain_descent(self):
        trace = one_round_trace(t=1)
        assert error_identity_check(trace, 0.1) <= 1e-12

    def test_zero_eta(self):
        trace = one_round_trace(eta=0.0)
        assert error_identity_check(trace, 0.0) == 0.0
        np.testing.assert_array_equal(trace.e_start, trace.e_end)

    def test_requires_w_star(self):
        client = single_client()
        history = run_rounds(
            [client], np.zeros(1), 0.1, PlainSGDStrategy(), fixed_schedule(2), rounds=1
        )
        with pytest.raises(ValueError):
            error_identity_check(history.traces[0], 0.1)

    def test_mixed_step_counts_multi_client(self):
        """The identity is exact for any per-client step profile."""
        rng = np.random.default_rng(3)
        for seed in range(5):
            mats = [np.array([[rng.uniform(0.5, 2.0)]]) for _ in range(3)]
            centers = [rng.standard_normal(1) for _ in range(3)]
            objs = [Quadratic.centered(A, m) for A, m in zip(mats, centers)]
            w = np.full(3, 1 / 3)
            agg = sum(wi * A for wi, A in zip(w, mats))
            w_star = np.linalg.solve(agg, sum(wi * A @ m for wi, A, m in zip(w, mats, centers)))
            clients = [ClientState(f"c{i}", 1 / 3, o) for i, o in enumerate(objs)]
            history = run_rounds(
                clients, rng.standard_normal(1), 0.05, PlainSGDStrategy(),
                fixed_schedule([1, 2, 5]), rounds=8, w_star=w_star,
            )
            for trace in history.traces:
                assert trace.identity_residual <= 1e-12


class TestRecursionBounds:
    def test_worked_example_schedule_form_violated_young_form_holds(self):
        trace = one_round_trace()
        consts = quad_1d().smoothness_constants(3.0, np.array([3.0]))
        rep = recursion_bound_report(trace, consts, rho=0.1)
        assert isinstance(rep, BoundReport)
        assert rep.lhs == pytest.approx(5.9049)
        assert rep.schedule_rhs == pytest.approx(5.85)
        assert not rep.schedule_satisfied
        assert rep.young_satisfied
        assert rep.theta == pytest.approx(0.4)
        # realized quantities behind the young form, and its hand-expanded
        # right side (1 - 0.3) * 9 + 2 * 0.01 * 36 + (2 + 10) * 0.01 * 0.09
        assert trace.G_k == pytest.approx(6.0)
        assert trace.realized_D == pytest.approx(0.3)
        assert rep.young_rhs == pytest.approx(7.0308)

    def test_zero_drift_schedule_form_holds(self):
        # all-t=1 rounds have no drift cross term, so even the schedule form holds
        trace = one_round_trace(t=1)
        consts = quad_1d().smoothness_constants(3.0, np.array([3.0]))
        rep = recursion_bound_report(trace, consts, rho=0.1)
        assert rep.schedule_satisfied
        assert rep.young_satisfied

    def test_small_eta_limit(self):
        trace = one_round_trace(eta=1e-9, t=2)
        consts = quad_1d().smoothness_constants(3.0, np.array([3.0]))
        rep = recursion_bound_report(trace, consts, rho=1e-10)
        assert rep.lhs == pytest.approx(float(trace.e_start @ trace.e_start), rel=1e-6)
        assert rep.schedule_satisfied and rep.young_satisfied

    def test_vacuous_theta_prime(self):
        trace = one_round_trace()
        consts = quad_1d().smoothness_constants(3.0, np.array([3.0]))
        rep = recursion_bound_report(trace, consts, rho=0.9)  # rho > theta
        assert rep.vacuous
        assert rep.young_satisfied is None

    def test_rho_validation(self):
        trace = one_round_trace()
        consts = quad_1d().smoothness_constants(3.0, np.array([3.0]))
        with pytest.raises(ValueError):
            recursion_bound_report(trace, consts, rho=0.0)


class TestResidualLimit:
    def test_arithmetic(self):
        assert residual_limit(0.45, 0.5) == pytest.approx(1.35)
        assert residual_limit(0.0, 0.5) == 0.0
        assert residual_limit(1.0, 0.999999) == pytest.approx(2.0, rel=1e-5)

    def test_theta_range(self):
        with pytest.raises(ValueError):
            residual_limit(1.0, 0.0)
        with pytest.raises(ValueError):
            residual_limit(1.0, 1.0)


class TestRunRounds:
    def test_geometric_contraction(self):
        client = single_client()
        history = run_rounds(
            [client], np.zeros(1), 0.1, PlainSGDStrategy(), fixed_schedule(1),
            rounds=50, w_star=np.array([3.0]),
        )
        ratio = np.linalg.norm(history.w_final - 3.0) / 3.0
        assert ratio == pytest.approx(0.9**50, rel=1e-9)

    def test_zero_rounds(self):
        client = single_client()
        history = run_rounds(
            [client], np.array([1.0]), 0.1, PlainSGDStrategy(), fixed_schedule(1), rounds=0
        )
        assert history.rounds == 0
        np.testing.assert_array_equal(history.w_final, [1.0])

    def test_two_identical_clients_match_single(self):
        obj = quad_1d()
        single = run_rounds(
            [ClientState("a", 1.0, obj)], np.zeros(1), 0.1, PlainSGDStrategy(),
            fixed_schedule(3), rounds=10,
        )
        double = run_rounds(
            [ClientState("a", 0.5, obj), ClientState("b", 0.5, obj)], np.zeros(1), 0.1,
            PlainSGDStrategy(), fixed_schedule(3), rounds=10,
        )
        np.testing.assert_allclose(single.w_final, double.w_final, rtol=1e-12)

    def test_aggregation_consistency_each_round(self):
        rng = np.random.default_rng(8)
        objs = [Quadratic.centered(np.array([[rng.uniform(0.5, 2)]]), rng.standard_normal(1)) for _ in range(3)]
        clients = [ClientState(f"c{i}", 1 / 3, o) for i, o in enumerate(objs)]
        history = run_rounds(
            clients, np.zeros(1), 0.1, PlainSGDStrategy(), fixed_schedule(2), rounds=10
        )
        for trace in history.traces:
            recon = trace.w_start + sum(
                w * d for w, d in zip(trace.weights, trace.deviations)
            )
            assert np.linalg.norm(trace.w_end - recon) <= 1e-12

    def test_contraction_envelope_diagonal(self):
        # per-round error ratio sits inside [(1 - eta L)^t, (1 - eta mu)^t] per axis
        A = np.diag([0.5, 2.0])
        obj = Quadratic.centered(A, np.zeros(2))
        client = ClientState("c", 1.0, obj)
        eta, t = 0.1, 3
        history = run_rounds(
            [client], np.array([1.0, 1.0]), eta, PlainSGDStrategy(), fixed_schedule(t),
            rounds=20, w_star=np.zeros(2),
        )
        lo, hi = (1 - eta * 2.0) ** t, (1 - eta * 0.5) ** t
        for trace in history.traces:
            ratio = np.linalg.norm(trace.e_end) / np.linalg.norm(trace.e_start)
            assert lo - 1e-12 <= ratio <= hi + 1e-12

    def test_additive_clock(self):
        clients = [
            ClientState("a", 0.5, quad_1d(), step_cost=1.0, comm_delay=0.5),
            ClientState("b", 0.5, quad_1d(), step_cost=2.0, comm_delay=0.0),
        ]
        history = run_rounds(
            clients, np.zeros(1), 0.1, PlainSGDStrategy(), fixed_schedule([2, 3]), rounds=2
        )
        assert history.traces[0].duration == pytest.approx(2 * 1.0 + 0.5 + 3 * 2.0)
        assert history.sim_time == pytest.approx(2 * (2 * 1.0 + 0.5 + 3 * 2.0))

    def test_parallel_max_clock(self):
        clients = [
            ClientState("a", 0.5, quad_1d(), step_cost=1.0, comm_delay=0.5),
            ClientState("b", 0.5, quad_1d(), step_cost=2.0, comm_delay=0.0),
        ]
        assert round_duration(clients, [2, 3], "parallel_max") == pytest.approx(6.0)

    def test_time_budget_stops_before_incomplete_round(self):
        client = ClientState("a", 1.0, quad_1d(), step_cost=1.0, comm_delay=0.0)
        history = run_rounds(
            [client], np.zeros(1), 0.1, PlainSGDStrategy(), fixed_schedule(3),
            time_budget=10.0,
        )
        # each round costs 3 s: 3 full rounds fit, the 4th would end at 12 s
        assert history.rounds == 3
        assert history.sim_time == pytest.approx(9.0)
        assert history.stopped == "time_budget"

    def test_exactly_one_stop_rule(self):
        client = single_client()
        with pytest.raises(ValueError):
            run_rounds([client], np.zeros(1), 0.1, PlainSGDStrategy(), fixed_schedule(1))
        with pytest.raises(ValueError):
            run_rounds(
                [client], np.zeros(1), 0.1, PlainSGDStrategy(), fixed_schedule(1),
                rounds=1, time_budget=1.0,
            )

    def test_weight_sum_checked(self):
        bad = [ClientState("a", 0.5, quad_1d()), ClientState("b", 0.4, quad_1d())]
        with pytest.raises(ValueError):
            run_rounds(bad, np.zeros(1), 0.1, PlainSGDStrategy(), fixed_schedule(1), rounds=1)

    def test_divergence_reports_round(self):
        client = ClientState("a", 1.0, quad_1d(curvature=30.0))
        with pytest.raises(DivergenceError) as err:
            run_rounds([client], np.array([10.0]), 1.0, PlainSGDStrategy(), fixed_schedule(5), rounds=50)
        assert err.value.round_index is not None
