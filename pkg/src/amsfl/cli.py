"""Command-line entry point.

Verbs: ``run <config>`` executes an experiment matrix, ``verify <suite>``
runs a numerical property suite, ``schedule <cost-model-file>`` prints a
greedy plan with its oracle comparison, ``oracle <cost-model-file>``
enumerates every maximal feasible plan.  Exit codes: 0 success, 1
verification failure, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness, scheduler
from .harness import ConfigError, ExperimentConfig
from .scheduler import CostModel, ScheduleParams


def _load_cost_file(path) -> tuple[CostModel, list[float], ScheduleParams]:
    with open(path) as fh:
        raw = json.load(fh)
    try:
        cost = CostModel(
            step_costs=tuple(raw["step_costs"]),
            comm_delays=tuple(raw.get("comm_delays", [0.0] * len(raw["step_costs"]))),
            budget=float(raw["budget"]),
        )
        n = cost.n
        weights = raw.get("weights", [1.0 / n] * n)
        params = ScheduleParams(alpha=float(raw.get("alpha", 1.0)), beta=float(raw.get("beta", 1.0)))
    except KeyError as err:
        raise ConfigError(f"missing field {err}", str(path)) from None
    except ValueError as err:
        raise ConfigError(str(err), str(path)) from None
    if len(weights) != n:
        raise ConfigError("weights length must match step_costs", str(path))
    return cost, weights, params


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    summary = harness.run_experiment(config, output_dir=args.output)
    for run in summary["runs"]:
        if run["status"] == "ok":
            acc = run.get("final_accuracy")
            print(
                f"{run['run_id']}: {run['rounds']} rounds, "
                f"{run['sim_time_s']:.3f} s simulated, "
                f"mean {run['mean_round_s']:.3f} s/round, "
                f"final loss {run['final_loss']:.6g}"
                + (f", accuracy {acc:.4f}" if acc is not None else "")
            )
        else:
            print(f"{run['run_id']}: FAILED ({run['error']})")
    return 0


def _cmd_verify(args) -> int:
    suites = sorted(harness.VERIFY_SUITES) if args.suite == "all" else [args.suite]
    failed = False
    for name in suites:
        report = harness.verify(name)
        print(f"== suite {name}: {'PASS' if report.passed else 'FAIL'}")
        for line in report.lines:
            print(f"   {line}")
        failed = failed or not report.passed
    return 1 if failed else 0


def _cmd_schedule(args) -> int:
    cost, weights, params = _load_cost_file(args.cost_model)
    plan = scheduler.greedy_schedule(cost, weights, params)
    print(f"greedy plan:     t = {list(plan.steps)}")
    print(f"  total_time = {plan.total_time:.6g} s (budget {cost.budget:.6g} s)")
    print(f"  error cost = {plan.objective_value:.6g}  E = {plan.E:.6g}  D2 = {plan.schedule_D2:.6g}")
    uniform = scheduler.uniform_plan(cost, weights, params)
    print(f"uniform plan:    t = {list(uniform.steps)}  cost {uniform.objective_value:.6g}")
    try:
        oracle = scheduler.brute_force_schedule(cost, weights, params)
        gap = plan.objective_value - oracle.objective_value
        print(f"oracle optimum:  t = {list(oracle.steps)}  cost {oracle.objective_value:.6g}  gap {gap:.6g}")
    except scheduler.SearchSpaceError as err:
        print(f"oracle optimum:  skipped ({err})")
    alloc = scheduler.continuous_allocation(
        cost.step_costs, weights, cost.budget - cost.comm_total
    )
    print(f"continuous law:  t* = {[round(float(x), 4) for x in alloc]}")
    return 0


def _cmd_oracle(args) -> int:
    cost, weights, params = _load_cost_file(args.cost_model)
    try:
        best = scheduler.brute_force_schedule(cost, weights, params)
    except scheduler.SearchSpaceError as err:
        raise ConfigError(str(err), str(args.cost_model)) from None
    plans = _enumerate_maximal(cost)
    plans.sort(key=lambda p: (scheduler.error_cost(p, weights, params), p))
    print(f"{len(plans)} maximal feasible plans (budget {cost.budget:.6g} s):")
    for p in plans:
        cost_val = scheduler.error_cost(p, weights, params)
        marker = "  <- optimum" if tuple(p) == best.steps else ""
        print(f"  t = {list(p)}  time {cost.time_of(p):.6g}  cost {cost_val:.6g}{marker}")
    return 0


def _enumerate_maximal(cost: CostModel) -> list[tuple[int, ...]]:
    n = cost.n
    plans = []
    steps = [1] * n

    def visit(i, used):
        if i == n:
            if cost.maximal(steps):
                plans.append(tuple(steps))
            return
        c = cost.step_costs[i]
        rest = sum(cost.step_costs[i + 1 :])
        t = 1
        while used + c * t + rest <= cost.budget + 1e-12:
            steps[i] = t
            visit(i + 1, used + c * t)
            t += 1
        steps[i] = 1

    visit(0, cost.comm_total)
    return plans


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="amsfl", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--output", default=None, help="override the config's output_dir")
    p_run.set_defaults(fn=_cmd_run)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=sorted(harness.VERIFY_SUITES) + ["all"])
    p_verify.set_defaults(fn=_cmd_verify)

    p_sched = sub.add_parser("schedule", help="greedy plan + oracle comparison for a cost model")
    p_sched.add_argument("cost_model")
    p_sched.set_defaults(fn=_cmd_schedule)

    p_oracle = sub.add_parser("oracle", help="enumerate maximal plans for a cost model")
    p_oracle.add_argument("cost_model")
    p_oracle.set_defaults(fn=_cmd_oracle)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (FileNotFoundError, json.JSONDecodeError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
