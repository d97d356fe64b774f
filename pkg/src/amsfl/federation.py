"""Round loop for multi-step federated training on exact objectives.

One round is: broadcast the global model, run t_i full-batch gradient steps
per client, aggregate the weighted deviations.  Because every oracle is
deterministic, the engine can verify an exact algebraic identity for the
global error each round (when the optimum is known) and evaluate two
error-recursion bound forms:

* the ``schedule`` form, whose additive term uses only scheduled quantities
  (E, D_k^2) and region constants (G, L) -- diagnostic only, it omits a drift
  cross term and is violated even on a hand-worked 1-D quadratic; and
* the ``young`` form, a Young-inequality linearization with parameter rho
  using realized drift norms -- the sound one, used by the acceptance gate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .gda import DriftRecord
from .objectives import Objective, SmoothnessConstants, as_param_vector

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-9
CLOCK_MODES = ("additive", "parallel_max")


class DivergenceError(RuntimeError):
    """A local iterate became non-finite or exceeded the divergence guard."""

    def __init__(self, message, round_index=None, client_id=None):
        super().__init__(message)
        self.round_index = round_index
        self.client_id = client_id


@dataclass
class ClientState:
    """One federated client: aggregation weight, cost model and objective."""

    id: str
    weight: float
    objective: Objective
    step_cost: float = 1.0
    comm_delay: float = 0.0
    steps: int = 1

    def __post_init__(self):
        if not 0 < self.weight <= 1:
            raise ValueError(f"client {self.id}: weight must be in (0, 1], got {self.weight}")
        if self.step_cost <= 0:
            raise ValueError(f"client {self.id}: step_cost must be positive")
        if self.comm_delay < 0:
            raise ValueError(f"client {self.id}: comm_delay must be nonnegative")
        if self.steps < 1:
            raise ValueError(f"client {self.id}: steps must be at least 1")


def check_weights(clients: Sequence[ClientState], tol: float = 1e-12) -> None:
    total = sum(c.weight for c in clients)
    if abs(total - 1.0) > tol:
        raise ValueError(f"client weights sum to {total!r}, expected 1")


def local_multistep_sgd(
    client: ClientState,
    w_global,
    t: int,
    eta: float,
    *,
    divergence_limit: float = 1e12,
) -> tuple[np.ndarray, DriftRecord]:
    """Run t deterministic full-batch gradient steps from the broadcast model.

    Returns the final local model and the drift record whose entry s is the
    gradient at local step s minus the gradient at the broadcast point.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    obj = client.objective
    w = as_param_vector(w_global, obj.dim, "w_global").copy()
    g0 = obj.gradient(w)
    per_step = []
    left_region = False
    for s in range(t):
        g = g0 if s == 0 else obj.gradient(w)
        per_step.append(g - g0)
        w = w - eta * g
        if not np.all(np.isfinite(w)) or float(np.linalg.norm(w)) > divergence_limit:
            raise DivergenceError(
                f"client {client.id} diverged at local step {s + 1} "
                f"(norm {np.linalg.norm(w):.3e})",
                client_id=client.id,
            )
        if not left_region and not obj.in_region(w):
            left_region = True
    if left_region:
        logger.warning("client %s trajectory left its declared region", client.id)
    return w, DriftRecord(per_step)


def aggregate(weighted_models: Sequence[tuple[float, np.ndarray]]) -> np.ndarray:
    """Convex combination sum_i w_i * model_i; weights must sum to one."""
    if not weighted_models:
        raise ValueError("nothing to aggregate")
    total = sum(w for w, _ in weighted_models)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"aggregation weights sum to {total!r}, expected 1")
    acc = np.zeros_like(np.asarray(weighted_models[0][1], dtype=float))
    for w, m in weighted_models:
        acc = acc + w * np.asarray(m, dtype=float)
    return acc


def weighted_delta_sum(
    weights: Sequence[float],
    deltas: Sequence[np.ndarray],
    scales: Sequence[float] | None = None,
) -> np.ndarray:
    """sum_i weight_i * scale_i * delta_i with a fixed accumulation order.

    Shared by all aggregation rules so that rules which reduce to plain
    weighted averaging (e.g. normalized averaging with equal step counts)
    produce bit-identical arithmetic.
    """
    acc = np.zeros_like(np.asarray(deltas[0], dtype=float))
    for i, d in enumerate(deltas):
        s = 1.0 if scales is None else scales[i]
        acc = acc + (weights[i] * s) * np.asarray(d, dtype=float)
    return acc


@dataclass
class RoundTrace:
    """Everything produced in one round, plus aggregates used by bound checks."""

    round_index: int
    eta: float
    w_start: np.ndarray
    w_end: np.ndarray
    client_ids: list[str]
    weights: np.ndarray
    steps: list[int]
    local_models: list[np.ndarray]
    deviations: list[np.ndarray]
    drifts: list[DriftRecord] | None
    grads_at_start: list[np.ndarray]
    duration: float
    sim_time: float
    e_start: np.ndarray | None = None
    e_end: np.ndarray | None = None
    E: float = field(init=False)
    schedule_D2: float = field(init=False)
    G_k: float = field(init=False)
    realized_D: float | None = field(init=False)
    delta_k_schedule: float | None = None
    identity_residual: float | None = None

    def __post_init__(self):
        w = self.weights
        t = np.asarray(self.steps, dtype=float)
        self.E = float(np.dot(w, t))
        self.schedule_D2 = float(np.dot(w, t * (t - 1.0) / 2.0))
        self.G_k = float(
            np.linalg.norm(weighted_delta_sum(w, self.grads_at_start, scales=list(t)))
        )
        if self.drifts is not None:
            self.realized_D = float(
                np.linalg.norm(weighted_delta_sum(w, [d.cumulative for d in self.drifts]))
            )
        else:
            self.realized_D = None

    @property
    def error_sq(self) -> float | None:
        if self.e_end is None:
            return None
        return float(self.e_end @ self.e_end)


def error_identity_check(trace: RoundTrace, eta: float) -> float:
    """Residual of the exact one-round error identity.

    With e the distance to the known optimum, plain multi-step SGD satisfies
    e_next = e - eta * sum_i w_i t_i g_i(w) - eta * sum_i w_i drift_i exactly
    (single-sum drift convention); the returned norm must be float-level small
    for any correct plain-SGD round.
    """
    if trace.e_start is None or trace.e_end is None:
        raise ValueError("error identity requires a known optimum (w_star)")
    if trace.drifts is None:
        raise ValueError("error identity requires drift records from plain SGD rounds")
    t = [float(s) for s in trace.steps]
    grad_term = weighted_delta_sum(trace.weights, trace.grads_at_start, scales=t)
    drift_term = weighted_delta_sum(trace.weights, [d.cumulative for d in trace.drifts])
    predicted = trace.e_start - eta * grad_term - eta * drift_term
    return float(np.linalg.norm(trace.e_end - predicted))


@dataclass(frozen=True)
class BoundReport:
    """Evaluation of both error-recursion bound forms on one round."""

    lhs: float
    schedule_rhs: float
    schedule_satisfied: bool
    young_rhs: float | None
    young_satisfied: bool | None
    theta: float
    theta_prime: float
    rho: float
    vacuous: bool
    delta_k_schedule: float
    delta_k_young: float | None


def recursion_bound_report(
    trace: RoundTrace,
    consts: SmoothnessConstants,
    rho: float,
) -> BoundReport:
    """Evaluate the schedule-form and young-form error recursions on a round.

    Schedule form: ||e+||^2 <= ||e||^2 - 2 eta E <grad F(w), e> + Delta_k with
    Delta_k = eta^2 G^2 E^2 + eta^2 L^2 G^2 D_k^2 (D_k^2 the schedule quantity).
    Young form: ||e+||^2 <= (1 - theta') ||e||^2 + 2 eta^2 G_k^2
    + (2 + 1/rho) eta^2 D_k^2 with realized norms, theta = 2 eta mu E and
    theta' = theta - rho.  theta' <= 0 is reported as vacuous, not failed.
    """
    if trace.e_start is None or trace.e_end is None:
        raise ValueError("bound reports require a known optimum (w_star)")
    if not 0 < rho < 1:
        raise ValueError(f"rho must be in (0, 1), got {rho}")
    eta = trace.eta
    e_sq = float(trace.e_start @ trace.e_start)
    lhs = float(trace.e_end @ trace.e_end)

    global_grad = weighted_delta_sum(trace.weights, trace.grads_at_start)
    descent = float(global_grad @ trace.e_start)
    delta_k_schedule = (
        eta**2 * consts.G**2 * trace.E**2
        + eta**2 * consts.L**2 * consts.G**2 * trace.schedule_D2
    )
    schedule_rhs = e_sq - 2.0 * eta * trace.E * descent + delta_k_schedule
    tol = 1e-12 + 1e-9 * abs(schedule_rhs)
    schedule_satisfied = lhs <= schedule_rhs + tol

    theta = 2.0 * eta * consts.mu * trace.E
    theta_prime = theta - rho
    vacuous = theta_prime <= 0
    if trace.realized_D is None:
        young_rhs = None
        young_satisfied = None
        delta_k_young = None
    else:
        delta_k_young = 2.0 * eta**2 * trace.G_k**2 + (2.0 + 1.0 / rho) * eta**2 * trace.realized_D**2
        young_rhs = (1.0 - theta_prime) * e_sq + delta_k_young
        tol = 1e-12 + 1e-9 * abs(young_rhs)
        young_satisfied = None if vacuous else lhs <= young_rhs + tol
    return BoundReport(
        lhs=lhs,
        schedule_rhs=schedule_rhs,
        schedule_satisfied=schedule_satisfied,
        young_rhs=young_rhs,
        young_satisfied=young_satisfied,
        theta=theta,
        theta_prime=theta_prime,
        rho=rho,
        vacuous=vacuous,
        delta_k_schedule=delta_k_schedule,
        delta_k_young=delta_k_young,
    )


def residual_limit(delta_k: float, theta: float) -> float:
    """Limiting residual level (1 + 1/theta) * Delta_k of the linearized recursion."""
    if not 0 < theta < 1:
        raise ValueError(f"theta must be in (0, 1), got {theta}")
    if delta_k < 0:
        raise ValueError("delta_k must be nonnegative")
    return (1.0 + 1.0 / theta) * delta_k


class Strategy:
    """Local-update/aggregation rule plugged into the round loop.

    ``plain_sgd`` marks strategies whose local rule is exactly plain gradient
    descent and whose aggregation is the plain weighted average, for which the
    exact error identity applies.
    """

    name = "strategy"
    plain_sgd = False

    def start_run(self, clients: Sequence[ClientState], dim: int) -> None:
        pass

    def run_round(
        self,
        w: np.ndarray,
        clients: Sequence[ClientState],
        steps: Sequence[int],
        eta: float,
    ) -> tuple[np.ndarray, list[np.ndarray], list[DriftRecord] | None]:
        """Return (w_next, local_models, drift_records_or_None)."""
        raise NotImplementedError


class PlainSGDStrategy(Strategy):
    """Plain multi-step local SGD with weighted-average aggregation.

    Used both by the fixed-step baseline and, paired with an adaptive schedule
    source, by the budget-aware scheduler.
    """

    plain_sgd = True

    def __init__(self, name: str = "fedavg"):
        self.name = name

    def run_round(self, w, clients, steps, eta):
        locals_, drifts = [], []
        for client, t in zip(clients, steps):
            w_i, drift = local_multistep_sgd(client, w, t, eta)
            locals_.append(w_i)
            drifts.append(drift)
        weights = [c.weight for c in clients]
        deltas = [w_i - w for w_i in locals_]
        w_next = w + weighted_delta_sum(weights, deltas)
        return w_next, locals_, drifts


ScheduleSource = Callable[[int, np.ndarray, Sequence[ClientState], list[RoundTrace]], Sequence[int]]


def fixed_schedule(t) -> ScheduleSource:
    """Schedule source assigning a constant step count (scalar or per-client)."""

    def source(k, w, clients, traces):
        if np.isscalar(t):
            return [int(t)] * len(clients)
        return [int(x) for x in t]

    return source


@dataclass
class RunHistory:
    """Outcome of one deterministic run: per-round traces plus bookkeeping."""

    strategy: str
    eta: float
    clock: str
    w_initial: np.ndarray
    w_final: np.ndarray
    traces: list[RoundTrace]
    sim_time: float
    stopped: str
    w_star: np.ndarray | None = None

    @property
    def rounds(self) -> int:
        return len(self.traces)


def round_duration(clients: Sequence[ClientState], steps: Sequence[int], clock: str) -> float:
    per_client = [c.step_cost * t + c.comm_delay for c, t in zip(clients, steps)]
    if clock == "additive":
        return float(sum(per_client))
    if clock == "parallel_max":
        return float(max(per_client))
    raise ValueError(f"unknown clock mode {clock!r}, expected one of {CLOCK_MODES}")


def run_rounds(
    clients: Sequence[ClientState],
    w0,
    eta: float,
    strategy: Strategy,
    schedule: ScheduleSource,
    *,
    rounds: int | None = None,
    time_budget: float | None = None,
    clock: str = "additive",
    w_star=None,
    consts: SmoothnessConstants | None = None,
    divergence_limit: float = 1e12,
) -> RunHistory:
    """Execute broadcast -> local updates -> aggregation rounds.

    Exactly one of ``rounds`` / ``time_budget`` is the stopping rule.  Under a
    time budget a round is not started unless it can complete within it.  The
    run is strictly sequential and deterministic given its inputs.
    """
    if (rounds is None) == (time_budget is None):
        raise ValueError("exactly one of rounds / time_budget must be set")
    if clock not in CLOCK_MODES:
        raise ValueError(f"unknown clock mode {clock!r}")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    check_weights(clients)
    dims = {c.objective.dim for c in clients}
    if len(dims) != 1:
        raise ValueError(f"clients disagree on dimension: {sorted(dims)}")
    dim = dims.pop()
    w = as_param_vector(w0, dim, "w0").copy()
    star = None if w_star is None else as_param_vector(w_star, dim, "w_star")
    weights = np.array([c.weight for c in clients], dtype=float)

    strategy.start_run(clients, dim)
    traces: list[RoundTrace] = []
    sim_time = 0.0
    stopped = "rounds"
    k = 0
    while True:
        if rounds is not None and k >= rounds:
            stopped = "rounds"
            break
        steps = [int(t) for t in schedule(k, w, clients, traces)]
        if len(steps) != len(clients) or any(t < 1 for t in steps):
            raise ValueError(f"schedule produced invalid steps {steps} at round {k}")
        duration = round_duration(clients, steps, clock)
        if time_budget is not None and sim_time + duration > time_budget + 1e-12:
            stopped = "time_budget"
            break

        try:
            w_next, locals_, drifts = strategy.run_round(w, clients, steps, eta)
        except DivergenceError as err:
            err.round_index = k
            raise
        if not np.all(np.isfinite(w_next)) or float(np.linalg.norm(w_next)) > divergence_limit:
            raise DivergenceError(
                f"global model diverged after round {k}", round_index=k
            )
        for client, t in zip(clients, steps):
            client.steps = t

        grads0 = [c.objective.gradient(w) for c in clients]
        sim_time += duration
        trace = RoundTrace(
            round_index=k,
            eta=eta,
            w_start=w,
            w_end=w_next,
            client_ids=[c.id for c in clients],
            weights=weights,
            steps=steps,
            local_models=locals_,
            deviations=[w_i - w for w_i in locals_],
            drifts=drifts,
            grads_at_start=grads0,
            duration=duration,
            sim_time=sim_time,
            e_start=None if star is None else w - star,
            e_end=None if star is None else w_next - star,
        )
        if consts is not None:
            trace.delta_k_schedule = (
                eta**2 * consts.G**2 * trace.E**2
                + eta**2 * consts.L**2 * consts.G**2 * trace.schedule_D2
            )
        if strategy.plain_sgd and star is not None and drifts is not None:
            trace.identity_residual = error_identity_check(trace, eta)
        traces.append(trace)
        w = w_next
        k += 1

    return RunHistory(
        strategy=strategy.name,
        eta=eta,
        clock=clock,
        w_initial=as_param_vector(w0, dim).copy(),
        w_final=w,
        traces=traces,
        sim_time=sim_time,
        stopped=stopped,
        w_star=star,
    )
