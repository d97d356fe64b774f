"""Time-budgeted local step allocation.

Given per-client step costs c_i, communication delays b_i and a per-round
budget S, assign integer step counts t_i >= 1 minimizing the error cost
alpha * sum_i w_i t_i + beta * sum_i w_i t_i (t_i - 1) / 2 while spending the
budget: steps are added one at a time to the feasible client with the
smallest marginal error per second until no further step fits.  A brute-force
enumeration over maximal feasible plans serves as the exact oracle, and a
closed-form continuous allocation t_i ~ (c_i w_i)^(-1/2) gives the
square-root law the integer plans are compared against.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Sequence

import numpy as np


class SearchSpaceError(ValueError):
    """Brute-force enumeration bounds exceeded."""


class InfeasibleBudgetError(ValueError):
    """Even the minimum one-step-per-client plan exceeds the budget."""


@dataclass(frozen=True)
class CostModel:
    """Per-client step costs and communication delays under a round budget."""

    step_costs: tuple[float, ...]
    comm_delays: tuple[float, ...]
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "step_costs", tuple(float(c) for c in self.step_costs))
        object.__setattr__(self, "comm_delays", tuple(float(b) for b in self.comm_delays))
        if len(self.step_costs) != len(self.comm_delays):
            raise ValueError("step_costs and comm_delays must have equal length")
        if not self.step_costs:
            raise ValueError("cost model needs at least one client")
        if any(c <= 0 for c in self.step_costs):
            raise ValueError("step costs must be positive")
        if any(b < 0 for b in self.comm_delays):
            raise ValueError("communication delays must be nonnegative")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.time_of([1] * self.n) > self.budget + 1e-12:
            raise InfeasibleBudgetError(
                f"minimum plan needs {self.time_of([1] * self.n)} s > budget {self.budget} s"
            )

    @property
    def n(self) -> int:
        return len(self.step_costs)

    @property
    def comm_total(self) -> float:
        return float(sum(self.comm_delays))

    def time_of(self, steps: Sequence[int]) -> float:
        """Round time sum_i (c_i t_i + b_i) of a plan."""
        return float(
            sum(c * t for c, t in zip(self.step_costs, steps)) + self.comm_total
        )

    def feasible(self, steps: Sequence[int]) -> bool:
        return all(t >= 1 for t in steps) and self.time_of(steps) <= self.budget + 1e-12

    def maximal(self, steps: Sequence[int]) -> bool:
        """No single extra step to any client stays within the budget."""
        if not self.feasible(steps):
            return False
        for i in range(self.n):
            trial = list(steps)
            trial[i] += 1
            if self.time_of(trial) <= self.budget + 1e-12:
                return False
        return True


@dataclass(frozen=True)
class ScheduleParams:
    """Error-cost coefficients; the linear term prices total weighted steps,
    the quadratic term prices drift growth t(t-1)/2."""

    alpha: float
    beta: float
    eta: float | None = None
    mu: float | None = None
    L: float | None = None
    G: float | None = None
    G_k: float | None = None

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")

    @classmethod
    def derive(cls, eta: float, mu: float, L: float, G: float, G_k: float) -> "ScheduleParams":
        """alpha = 2 eta sqrt(mu) G_k, beta = eta^2 L^2 G^2 / 2, keeping the
        derivation inputs for provenance."""
        return cls(
            alpha=2.0 * eta * sqrt(mu) * G_k,
            beta=0.5 * eta**2 * L**2 * G**2,
            eta=eta,
            mu=mu,
            L=L,
            G=G,
            G_k=G_k,
        )


@dataclass(frozen=True)
class StepPlan:
    """A round's integer allocation with its cost and aggregate quantities."""

    steps: tuple[int, ...]
    total_time: float
    objective_value: float
    E: float
    schedule_D2: float
    delta_k: float | None = None


def schedule_aggregates(steps: Sequence[int], weights: Sequence[float]) -> tuple[float, float]:
    """E = sum w_i t_i and D2 = sum w_i t_i (t_i - 1) / 2."""
    t = np.asarray(steps, dtype=float)
    w = np.asarray(weights, dtype=float)
    return float(np.dot(w, t)), float(np.dot(w, t * (t - 1.0) / 2.0))


def error_cost(steps: Sequence[int], weights: Sequence[float], params: ScheduleParams) -> float:
    """alpha * sum w_i t_i + beta * sum w_i t_i (t_i - 1) / 2."""
    if any(t < 1 for t in steps):
        raise ValueError("all step counts must be at least 1")
    E, D2 = schedule_aggregates(steps, weights)
    return params.alpha * E + params.beta * D2


def _make_plan(steps: Sequence[int], cost: CostModel, weights, params: ScheduleParams) -> StepPlan:
    steps = tuple(int(t) for t in steps)
    E, D2 = schedule_aggregates(steps, weights)
    delta_k = None
    if params.eta is not None and params.G is not None and params.L is not None:
        delta_k = (
            params.eta**2 * params.G**2 * E**2
            + params.eta**2 * params.L**2 * params.G**2 * D2
        )
    return StepPlan(
        steps=steps,
        total_time=cost.time_of(steps),
        objective_value=error_cost(steps, weights, params),
        E=E,
        schedule_D2=D2,
        delta_k=delta_k,
    )


def greedy_schedule(
    cost: CostModel,
    weights: Sequence[float],
    params: ScheduleParams,
    mode: str = "fill",
    marginal: str = "exact",
) -> StepPlan:
    """Greedy budget-filling step assignment.

    Starting from t_i = 1, repeatedly add one step to the feasible client with
    the smallest marginal error per second, ties to the lowest index, until no
    client's next step fits in the budget.  Only increments that keep the plan
    within the budget are considered, so the returned plan is always feasible
    and maximal.

    marginal="exact" prices the next step by the true objective increment
    w_i (alpha + beta t_i) / c_i, which makes the greedy exactly optimal when
    all step costs are equal.  marginal="midpoint" uses the trapezoidal rate
    w_i (alpha + beta (2 t_i - 1) / 2) / c_i instead; the per-client
    -w_i beta / 2 shift can reorder picks, so it loses uniform-cost exactness
    and exists only for comparison.

    mode="min" returns the unconstrained minimizer t_i = 1 of the (monotone)
    objective instead; it exists to document that pure minimization degenerates
    to minimum participation.
    """
    if mode not in ("fill", "min"):
        raise ValueError(f"unknown mode {mode!r}")
    if marginal not in ("exact", "midpoint"):
        raise ValueError(f"unknown marginal rule {marginal!r}")
    n = cost.n
    if len(weights) != n:
        raise ValueError("weights length must match cost model")
    steps = [1] * n
    if mode == "min":
        return _make_plan(steps, cost, weights, params)
    while True:
        best = None
        best_ratio = None
        for i in range(n):
            trial = list(steps)
            trial[i] += 1
            if cost.time_of(trial) > cost.budget + 1e-12:
                continue
            if marginal == "exact":
                rate = params.alpha + params.beta * steps[i]
            else:
                rate = params.alpha + params.beta * (2 * steps[i] - 1) / 2.0
            ratio = weights[i] * rate / cost.step_costs[i]
            if best_ratio is None or ratio < best_ratio:
                best, best_ratio = i, ratio
        if best is None:
            break
        steps[best] += 1
    return _make_plan(steps, cost, weights, params)


MAX_BRUTE_CLIENTS = 6
MAX_BRUTE_STEPS = 64
_MAX_BRUTE_NODES = 5_000_000


def brute_force_schedule(
    cost: CostModel,
    weights: Sequence[float],
    params: ScheduleParams,
) -> StepPlan:
    """Exact oracle: enumerate every maximal feasible plan, return the one of
    minimum error cost (ties broken by lexicographically smallest plan)."""
    n = cost.n
    if n > MAX_BRUTE_CLIENTS:
        raise SearchSpaceError(f"{n} clients exceeds brute-force bound {MAX_BRUTE_CLIENTS}")
    slack = cost.budget - cost.comm_total
    cap = int(slack // min(cost.step_costs))
    if cap > MAX_BRUTE_STEPS:
        raise SearchSpaceError(
            f"per-client step cap {cap} exceeds brute-force bound {MAX_BRUTE_STEPS}"
        )
    best_plan: tuple[int, ...] | None = None
    best_cost = None
    nodes = 0
    steps = [1] * n

    def visit(i: int, used: float):
        nonlocal best_plan, best_cost, nodes
        nodes += 1
        if nodes > _MAX_BRUTE_NODES:
            raise SearchSpaceError("brute-force enumeration node limit exceeded")
        if i == n:
            plan = tuple(steps)
            if not cost.maximal(plan):
                return
            c = error_cost(plan, weights, params)
            if best_cost is None or c < best_cost or (c == best_cost and plan < best_plan):
                best_plan, best_cost = plan, c
            return
        c_i = cost.step_costs[i]
        remaining_min = sum(cost.step_costs[i + 1 :])
        t = 1
        while used + c_i * t + remaining_min <= cost.budget + 1e-12:
            steps[i] = t
            visit(i + 1, used + c_i * t)
            t += 1
        steps[i] = 1

    visit(0, cost.comm_total)
    if best_plan is None:
        raise InfeasibleBudgetError("no feasible plan found")
    return _make_plan(best_plan, cost, weights, params)


def uniform_plan(cost: CostModel, weights: Sequence[float], params: ScheduleParams) -> StepPlan:
    """Equal step counts at the largest feasible uniform level."""
    m = 1
    while cost.feasible([m + 1] * cost.n):
        m += 1
    return _make_plan([m] * cost.n, cost, weights, params)


def continuous_allocation(
    step_costs: Sequence[float],
    weights: Sequence[float],
    budget: float,
) -> np.ndarray:
    """Square-root-law continuous allocation t_i* ~ (c_i w_i)^(-1/2).

    ``budget`` is the compute budget net of communication delays; the result
    is scaled so that sum_i c_i t_i* equals it exactly.  With uniform weights
    this reduces to t_i* ~ c_i^(-1/2).
    """
    c = np.asarray(step_costs, dtype=float)
    w = np.asarray(weights, dtype=float)
    if np.any(c <= 0) or np.any(w <= 0):
        raise ValueError("step costs and weights must be positive")
    if budget <= 0:
        raise ValueError("budget slack must be positive")
    raw = 1.0 / np.sqrt(c * w)
    return budget / float(np.dot(c, raw)) * raw
