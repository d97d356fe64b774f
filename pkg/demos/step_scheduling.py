"""Budget-constrained step allocation: greedy vs oracle vs uniform vs the
continuous square-root law.

Two clients with step costs 1 s and 2 s share a 6 s round budget.  The
greedy starts every client at one step and repeatedly buys the cheapest
marginal error per second that still fits; the oracle enumerates every
maximal plan.  The continuous law t_i ~ (c_i w_i)^(-1/2) answers a different
question (equalized diminishing-returns error), so its direction is shown
side by side rather than merged.
"""

import numpy as np

from amsfl import (
    CostModel,
    ScheduleParams,
    brute_force_schedule,
    continuous_allocation,
    error_cost,
    greedy_schedule,
    uniform_plan,
)

cost = CostModel(step_costs=(1.0, 2.0), comm_delays=(0.0, 0.0), budget=6.0)
weights = [0.5, 0.5]
params = ScheduleParams(alpha=1.0, beta=1.0)

print(f"clients: costs {cost.step_costs} s/step, budget {cost.budget} s, weights {weights}")
print(f"error cost of a plan t: alpha*sum w t + beta*sum w t(t-1)/2 with alpha=beta=1\n")

greedy = greedy_schedule(cost, weights, params)
oracle = brute_force_schedule(cost, weights, params)
uniform = uniform_plan(cost, weights, params)
print(f"greedy plan   t = {list(greedy.steps)}  time {greedy.total_time:.1f}  cost {greedy.objective_value:.2f}")
print(f"oracle plan   t = {list(oracle.steps)}  time {oracle.total_time:.1f}  cost {oracle.objective_value:.2f}")
print(f"uniform plan  t = {list(uniform.steps)}  time {uniform.total_time:.1f}  cost {uniform.objective_value:.2f}")
print(f"rejected alternative (4,1): cost {error_cost((4, 1), weights, params):.2f} "
      f"(loads the cheap client, pays more drift)")

print("\nscheduling coefficients derived from run state "
      "(alpha = 2 eta sqrt(mu) G_k, beta = eta^2 L^2 G^2 / 2):")
derived = ScheduleParams.derive(eta=0.1, mu=0.5, L=1.5, G=2.0, G_k=1.0)
print(f"  alpha = {derived.alpha:.4f}, beta = {derived.beta:.4f}")
plan = greedy_schedule(cost, weights, derived)
print(f"  greedy plan under derived coefficients: {list(plan.steps)}")

print("\ncontinuous square-root law (equalized reciprocal error, not this cost):")
for c, w in (((1.0, 4.0), (0.5, 0.5)), ((1.0, 1.0), (0.8, 0.2))):
    alloc = continuous_allocation(c, w, 12.0)
    print(f"  costs {c}, weights {w}: t* = {np.round(alloc, 3)}  ratio {alloc[0] / alloc[1]:.2f}")
print("  (cost ratio 4 gives step ratio 2; the heavier-weighted client gets fewer steps)")
