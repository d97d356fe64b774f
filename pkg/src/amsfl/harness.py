"""Experiment harness: config parsing, matrix runs, metrics, verification.

A config describes one task (synthetic or CSV), one or more strategies, a
stopping rule and a cost model; the harness runs every (seed, strategy) cell
deterministically, emits one line-delimited metrics record per round plus a
run summary, and can compute time-to-target statistics.  ``verify_*`` run the
numerical property suites behind the ``verify`` CLI verb.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, datasets, federation, scheduler
from .baselines import StrategySpec, build_strategy
from .federation import (
    DivergenceError,
    RunHistory,
    fixed_schedule,
    recursion_bound_report,
    run_rounds,
)
from .objectives import SmoothnessConstants
from .scheduler import CostModel, ScheduleParams, greedy_schedule

logger = logging.getLogger(__name__)

METRIC_FIELDS = (
    "run_id",
    "seed",
    "strategy",
    "round",
    "sim_time_s",
    "round_duration_s",
    "global_loss",
    "global_accuracy",
    "t_i",
    "E",
    "schedule_D2",
    "delta_k",
    "error_sq",
    "identity_residual",
)


class ConfigError(ValueError):
    """Invalid experiment config; carries the offending field path."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _require(cond: bool, message: str, path: str):
    if not cond:
        raise ConfigError(message, path)


@dataclass
class ExperimentConfig:
    """Validated experiment description (see ``from_dict`` for the schema)."""

    task: dict
    strategies: list[StrategySpec]
    eta: float
    seeds: list[int]
    step_costs: list[float]
    comm_delays: list[float]
    rounds: int | None = None
    time_budget: float | None = None
    round_budget: float | None = None
    clock: str = "additive"
    init_distance: float = 3.0
    region_radius: float | None = None
    target_accuracy: float | None = None
    target_loss: float | None = None
    output_dir: str = "out"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        _require(isinstance(raw, dict), "config must be an object", "")
        task = raw.get("task")
        _require(isinstance(task, dict), "missing task object", "task")
        ttype = task.get("type")
        _require(
            ttype in ("quadratic", "logistic", "csv"),
            f"unknown task type {ttype!r}",
            "task.type",
        )
        if ttype in ("quadratic", "logistic"):
            _require(int(task.get("n_clients", 0)) >= 1, "n_clients >= 1 required", "task.n_clients")
            _require(int(task.get("dim", 0)) >= 1, "dim >= 1 required", "task.dim")
        else:
            _require(bool(task.get("path")), "csv task needs a path", "task.path")
            _require(bool(task.get("schema")), "csv task needs a schema", "task.schema")
            _require(isinstance(task.get("partition"), dict), "csv task needs a partition", "task.partition")
            _require(task.get("positive_labels") is not None, "csv task needs positive_labels", "task.positive_labels")

        raw_strategies = raw.get("strategies", raw.get("strategy"))
        _require(raw_strategies is not None, "missing strategies", "strategies")
        if not isinstance(raw_strategies, list):
            raw_strategies = [raw_strategies]
        specs = []
        for i, s in enumerate(raw_strategies):
            path = f"strategies[{i}]"
            if isinstance(s, str):
                s = {"kind": s}
            _require(isinstance(s, dict) and "kind" in s, "strategy needs a kind", path)
            try:
                specs.append(
                    StrategySpec(
                        kind=s["kind"],
                        fixed_steps=int(s.get("fixed_steps", baselines.DEFAULT_FIXED_STEPS)),
                        mu_prox=float(s.get("mu_prox", baselines.DEFAULT_MU_PROX)),
                        alpha_dyn=float(s.get("alpha_dyn", baselines.DEFAULT_ALPHA_DYN)),
                    )
                )
            except ValueError as err:
                raise ConfigError(str(err), path) from None

        eta = raw.get("eta")
        _require(isinstance(eta, (int, float)) and eta > 0, "eta must be positive", "eta")

        stop = raw.get("stop")
        _require(isinstance(stop, dict), "missing stop rule", "stop")
        rounds = stop.get("rounds")
        time_budget = stop.get("time_budget")
        _require(
            (rounds is None) != (time_budget is None),
            "exactly one of rounds / time_budget must be set",
            "stop",
        )
        if rounds is not None:
            _require(int(rounds) >= 0, "rounds must be nonnegative", "stop.rounds")
        if time_budget is not None:
            _require(float(time_budget) > 0, "time_budget must be positive", "stop.time_budget")

        seeds = raw.get("seeds")
        _require(isinstance(seeds, list) and len(seeds) > 0, "seeds must be nonempty", "seeds")

        cost = raw.get("cost_model")
        _require(isinstance(cost, dict), "missing cost_model", "cost_model")
        step_costs = cost.get("step_costs")
        comm_delays = cost.get("comm_delays")
        _require(isinstance(step_costs, list) and len(step_costs) > 0, "step_costs required", "cost_model.step_costs")
        _require(
            isinstance(comm_delays, list) and len(comm_delays) == len(step_costs),
            "comm_delays must match step_costs",
            "cost_model.comm_delays",
        )
        _require(all(c > 0 for c in step_costs), "step costs must be positive", "cost_model.step_costs")
        _require(all(b >= 0 for b in comm_delays), "comm delays must be nonnegative", "cost_model.comm_delays")

        round_budget = raw.get("round_budget")
        if any(s.kind == "amsfl" for s in specs):
            _require(
                isinstance(round_budget, (int, float)) and round_budget > 0,
                "amsfl requires a positive round_budget",
                "round_budget",
            )

        clock = raw.get("clock", "additive")
        _require(clock in federation.CLOCK_MODES, f"unknown clock {clock!r}", "clock")

        return cls(
            task=task,
            strategies=specs,
            eta=float(eta),
            seeds=[int(s) for s in seeds],
            step_costs=[float(c) for c in step_costs],
            comm_delays=[float(b) for b in comm_delays],
            rounds=None if rounds is None else int(rounds),
            time_budget=None if time_budget is None else float(time_budget),
            round_budget=None if round_budget is None else float(round_budget),
            clock=clock,
            init_distance=float(raw.get("init_distance", 3.0)),
            region_radius=None if raw.get("region_radius") is None else float(raw["region_radius"]),
            target_accuracy=None if raw.get("target_accuracy") is None else float(raw["target_accuracy"]),
            target_loss=None if raw.get("target_loss") is None else float(raw["target_loss"]),
            output_dir=str(raw.get("output_dir", "out")),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"invalid JSON: {err}", str(path)) from None
        return cls.from_dict(raw)


@dataclass
class TaskInstance:
    """One seed's realized task: objectives, weights, optimum, start point."""

    federation: datasets.SyntheticFederation
    w0: np.ndarray
    consts: SmoothnessConstants | None
    region_center: np.ndarray | None
    region_radius: float | None


def build_task(config: ExperimentConfig, seed: int) -> TaskInstance:
    """Materialize the config's task for one seed.

    Draw order: task generation from ``seed``; then the start point offset
    from the derived stream (seed, 17).
    """
    task = config.task
    ttype = task["type"]
    if ttype == "quadratic":
        fed = datasets.generate_quadratic_federation(
            int(task["n_clients"]),
            int(task["dim"]),
            float(task.get("heterogeneity", 0.0)),
            seed,
            eig_range=tuple(task.get("eig_range", (0.5, 2.0))),
            weights=task.get("weights"),
        )
    elif ttype == "logistic":
        fed = datasets.generate_logistic_federation(
            int(task["n_clients"]),
            int(task["dim"]),
            float(task.get("heterogeneity", 0.0)),
            seed,
            samples_per_client=int(task.get("samples_per_client", 40)),
            ridge=float(task.get("ridge", 0.1)),
            feature_scale_range=tuple(task.get("feature_scale_range", (1.0, 1.0))),
            weights=task.get("weights"),
        )
    else:
        data = datasets.load_csv(task["path"], task["schema"])
        if task.get("minmax_scale", True):
            data = datasets.TabularDataset(
                datasets.apply_minmax(data.features, datasets.minmax_stats(data.features)),
                data.labels,
                data.feature_names,
            )
        part = dict(task["partition"])
        part.setdefault("n_clients", task.get("n_clients", len(config.step_costs)))
        part.setdefault("seed", seed)
        spec = datasets.PartitionSpec(**part)
        parts = datasets.partition_noniid(data, spec)
        objs, w, feats, labs = datasets.logistic_clients_from_partitions(
            parts,
            ridge=float(task.get("ridge", 0.1)),
            positive_labels=task["positive_labels"],
            weights=task.get("weights", "data"),
        )
        fed = datasets.SyntheticFederation(
            objectives=objs,
            weights=w,
            w_star=np.zeros(objs[0].dim),  # optimum unknown for real data
            heterogeneity=float("nan"),
            features=feats,
            labels=labs,
        )
        w0 = np.zeros(fed.dim)
        return TaskInstance(fed, w0, None, None, None)

    rng = np.random.default_rng([seed, 17])
    direction = rng.standard_normal(fed.dim)
    direction /= max(float(np.linalg.norm(direction)), 1e-12)
    w0 = fed.w_star + config.init_distance * direction
    radius = config.region_radius
    if radius is None:
        radius = max(1.0, 2.0 * config.init_distance + float(fed.heterogeneity))
    consts = fed.constants(fed.w_star, radius)
    return TaskInstance(fed, w0, consts, fed.w_star.copy(), radius)


class AdaptiveSchedule:
    """Per-round greedy step allocation under a fixed time budget.

    alpha is re-derived each round from the pre-round weighted gradient norm
    (the all-steps-one value of the scheduled gradient aggregate); beta uses
    the run-level region constants.
    """

    def __init__(self, cost: CostModel, weights, eta: float, consts: SmoothnessConstants):
        self.cost = cost
        self.weights = np.asarray(weights, dtype=float)
        self.eta = eta
        self.consts = consts
        self.plans: list[scheduler.StepPlan] = []

    def __call__(self, k, w, clients, traces):
        grad = np.zeros(len(w))
        for wt, client in zip(self.weights, clients):
            grad = grad + wt * client.objective.gradient(w)
        g_k = float(np.linalg.norm(grad))
        params = ScheduleParams.derive(self.eta, self.consts.mu, self.consts.L, self.consts.G, g_k)
        plan = greedy_schedule(self.cost, self.weights, params)
        self.plans.append(plan)
        return plan.steps


def _build_schedule(config: ExperimentConfig, spec: StrategySpec, task: TaskInstance):
    if spec.kind != "amsfl":
        return fixed_schedule(spec.fixed_steps)
    try:
        cost = CostModel(
            step_costs=tuple(config.step_costs),
            comm_delays=tuple(config.comm_delays),
            budget=config.round_budget,
        )
    except scheduler.InfeasibleBudgetError as err:
        raise ConfigError(str(err), "round_budget") from None
    consts = task.consts
    if consts is None:
        # Real-data runs have no derived constants; fall back to unit coefficients.
        consts = SmoothnessConstants(L=1.0, mu=1.0, G=1.0)
    return AdaptiveSchedule(cost, task.federation.weights, config.eta, consts)


def run_single(config: ExperimentConfig, spec: StrategySpec, seed: int, task: TaskInstance) -> RunHistory:
    """Run one (strategy, seed) cell on an already-built task."""
    fed = task.federation
    n = fed.n_clients
    if len(config.step_costs) != n:
        raise ConfigError(
            f"cost_model has {len(config.step_costs)} clients, task has {n}",
            "cost_model.step_costs",
        )
    clients = fed.make_clients(config.step_costs, config.comm_delays)
    strategy = build_strategy(spec)
    schedule = _build_schedule(config, spec, task)
    w_star = None if task.region_center is None else fed.w_star
    return run_rounds(
        clients,
        task.w0,
        config.eta,
        strategy,
        schedule,
        rounds=config.rounds,
        time_budget=config.time_budget,
        clock=config.clock,
        w_star=w_star,
        consts=task.consts,
    )


def records_from_history(
    history: RunHistory, fed: datasets.SyntheticFederation, run_id: str, seed: int
) -> list[dict]:
    """One metrics record per round, with exactly the METRIC_FIELDS keys."""
    records = []
    for trace in history.traces:
        rec = {
            "run_id": run_id,
            "seed": seed,
            "strategy": history.strategy,
            "round": trace.round_index,
            "sim_time_s": trace.sim_time,
            "round_duration_s": trace.duration,
            "global_loss": fed.global_value(trace.w_end),
            "global_accuracy": fed.global_accuracy(trace.w_end),
            "t_i": list(trace.steps),
            "E": trace.E,
            "schedule_D2": trace.schedule_D2,
            "delta_k": trace.delta_k_schedule,
            "error_sq": trace.error_sq,
            "identity_residual": trace.identity_residual,
        }
        records.append({k: rec[k] for k in METRIC_FIELDS})
    return records


def time_to_target(records, target: float, metric: str = "global_accuracy", mode: str = "at_least"):
    """First (round, sim_time_s) at which the metric crosses the target, or
    None if it never does."""
    if not records:
        raise ValueError("history is empty")
    for rec in records:
        value = rec.get(metric)
        if value is None:
            continue
        hit = value >= target if mode == "at_least" else value <= target
        if hit:
            return rec["round"], rec["sim_time_s"]
    return None


def write_jsonl(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def run_experiment(config: ExperimentConfig, output_dir=None) -> dict:
    """Run the full (seed x strategy) matrix and write metrics + summary files.

    Each run writes ``run_<strategy>_<seed>.jsonl``; a combined ``summary.json``
    collects per-run summaries (diverged runs are marked failed and the matrix
    continues).  Deterministic given the config.
    """
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = []
    for seed in config.seeds:
        task = build_task(config, seed)
        for spec in config.strategies:
            run_id = f"{spec.kind}_{seed}"
            entry = {"run_id": run_id, "seed": seed, "strategy": spec.kind}
            try:
                history = run_single(config, spec, seed, task)
            except DivergenceError as err:
                logger.error("run %s failed: %s", run_id, err)
                entry.update(status="failed", error=str(err))
                summaries.append(entry)
                continue
            records = records_from_history(history, task.federation, run_id, seed)
            path = out / f"run_{run_id}.jsonl"
            write_jsonl(records, path)
            entry.update(
                status="ok",
                rounds=history.rounds,
                sim_time_s=history.sim_time,
                mean_round_s=(history.sim_time / history.rounds) if history.rounds else None,
                final_loss=records[-1]["global_loss"] if records else None,
                final_accuracy=records[-1]["global_accuracy"] if records else None,
                final_error_sq=records[-1]["error_sq"] if records else None,
                metrics_file=path.name,
            )
            if config.target_accuracy is not None:
                entry["time_to_target_accuracy"] = time_to_target(
                    records, config.target_accuracy, "global_accuracy", "at_least"
                )
            if config.target_loss is not None:
                entry["time_to_target_loss"] = time_to_target(
                    records, config.target_loss, "global_loss", "at_most"
                )
            summaries.append(entry)
    summary = {"runs": summaries}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    name: str
    passed: bool
    lines: list[str] = field(default_factory=list)

    def add(self, ok: bool, line: str):
        self.passed = self.passed and ok
        self.lines.append(f"{'PASS' if ok else 'FAIL'}  {line}")


def _identity_matrix_runs(rounds: int = 15, seeds=(0, 1)) -> list[tuple[RunHistory, datasets.SyntheticFederation]]:
    runs = []
    for n in (1, 2, 5):
        for d in (1, 10):
            for t in (1, 2, 5):
                for seed in seeds:
                    fed = datasets.generate_quadratic_federation(n, d, 1.0, seed * 7919 + n * 101 + d * 13 + t)
                    rng = np.random.default_rng([seed, n, d, t])
                    w0 = fed.w_star + rng.standard_normal(d)
                    clients = fed.make_clients([1.0] * n, [0.0] * n)
                    history = run_rounds(
                        clients,
                        w0,
                        0.04,
                        federation.PlainSGDStrategy("fedavg"),
                        fixed_schedule(t),
                        rounds=rounds,
                        w_star=fed.w_star,
                    )
                    runs.append((history, fed))
    return runs


def verify_identity() -> VerifyReport:
    """Exact one-round error identity across a strongly convex matrix, plus
    the young-form recursion at rho = theta/2 on non-vacuous rounds."""
    report = VerifyReport("identity", True)
    runs = _identity_matrix_runs()
    worst = 0.0
    total_rounds = 0
    young_ok = 0
    young_total = 0
    for history, fed in runs:
        consts = fed.constants(fed.w_star, 2.0 * float(np.linalg.norm(history.w_initial - fed.w_star)) + 1.0)
        for trace in history.traces:
            total_rounds += 1
            worst = max(worst, trace.identity_residual)
            theta = 2.0 * history.eta * consts.mu * trace.E
            rho = theta / 2.0
            if 0 < rho < 1:
                rep = recursion_bound_report(trace, consts, rho)
                if not rep.vacuous and rep.young_satisfied is not None:
                    young_total += 1
                    young_ok += int(rep.young_satisfied)
    report.add(
        worst <= 1e-10,
        f"identity residual <= 1e-10 on {total_rounds} rounds across {len(runs)} runs (max {worst:.3e})",
    )
    frac = young_ok / max(young_total, 1)
    report.add(
        frac >= 0.99,
        f"young-form recursion satisfied on {young_ok}/{young_total} non-vacuous rounds ({frac:.4f})",
    )
    return report


def gda_sweep_draw(rng: np.random.Generator, i: int):
    """One (objective, w, delta) draw for the remainder-bound sweep.

    The second-order remainder bound with a gradient-Lipschitz constant L is
    only sound where L also dominates the Hessian's variation along the
    segment, so the draws stay in that regime: quartic points keep the segment
    at distance >= 2 from the center (there 12 s u^2 >= 24 s u), and logistic
    rows are clipped to norm <= 1.5 with ridge >= 0.35 (>= the curvature
    variation 0.0963 * mean row-norm^3).  tests/test_gda.py documents the
    violation outside this regime.
    """
    from .objectives import Logistic, Quadratic, Quartic

    kind = i % 3
    d = int(rng.integers(1, 6))
    delta = rng.standard_normal(d)
    delta *= rng.uniform(0.01, 1.0) / max(float(np.linalg.norm(delta)), 1e-12)
    if kind == 0:
        obj = Quadratic(datasets._random_spd(rng, d, (0.3, 3.0)), rng.standard_normal(d))
        w = rng.standard_normal(d)
    elif kind == 1:
        X = rng.standard_normal((8, d))
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        X = X / np.maximum(norms / 1.5, 1.0)
        y = np.where(rng.uniform(size=8) < 0.5, -1.0, 1.0)
        obj = Logistic(X, y, ridge=float(rng.uniform(0.35, 0.6)))
        w = rng.standard_normal(d)
    else:
        center = rng.standard_normal(d)
        obj = Quartic(center, float(rng.uniform(0.1, 1.0)))
        direction = rng.standard_normal(d)
        direction /= max(float(np.linalg.norm(direction)), 1e-12)
        w = center + float(rng.uniform(2.2, 5.0)) * direction
    return obj, w, delta, kind


def verify_gda(draws: int = 1000) -> VerifyReport:
    """Remainder bound sweep with segment-valid constants over random
    objectives, points and displacements."""
    from .gda import gda_remainder

    report = VerifyReport("gda", True)
    rng = np.random.default_rng(2024)
    violations = 0
    quad_worst = 0.0
    for i in range(draws):
        obj, w, delta, kind = gda_sweep_draw(rng, i)
        mid = w + 0.5 * delta
        L = obj.smoothness_constants(0.5 * float(np.linalg.norm(delta)) + 1e-9, mid).L
        rep = gda_remainder(obj, w, delta, L)
        if not rep.satisfied:
            violations += 1
        if kind == 0:
            quad_worst = max(quad_worst, rep.remainder_norm)
    report.add(violations == 0, f"remainder bound violations: {violations} of {draws} draws")
    report.add(quad_worst <= 1e-12, f"quadratic remainder exactly zero (max {quad_worst:.3e})")
    return report


def verify_scheduler() -> VerifyReport:
    """Greedy vs brute force, feasibility/maximality, and the sqrt law."""
    report = VerifyReport("scheduler", True)
    params = ScheduleParams(alpha=1.0, beta=1.0)

    cost = CostModel((1.0, 2.0), (0.0, 0.0), 6.0)
    g = greedy_schedule(cost, [0.5, 0.5], params)
    bf = scheduler.brute_force_schedule(cost, [0.5, 0.5], params)
    report.add(
        g.steps == (2, 2) and bf.steps == (2, 2) and g.total_time == 6.0,
        f"worked instance: greedy {g.steps} == oracle {bf.steps}, time {g.total_time}",
    )

    rng = np.random.default_rng(7)
    mism = 0
    for _ in range(100):
        n = int(rng.integers(2, 5))
        c = float(rng.uniform(0.5, 2.0))
        w = rng.dirichlet(np.full(n, 5.0))
        budget = c * n * float(rng.uniform(1.0, 12 / n))
        try:
            cm = CostModel((c,) * n, (0.0,) * n, budget)
        except scheduler.InfeasibleBudgetError:
            continue
        p = ScheduleParams(alpha=float(rng.uniform(0.1, 5)), beta=float(rng.uniform(0.1, 5)))
        if scheduler.brute_force_schedule(cm, w, p).objective_value < greedy_schedule(cm, w, p).objective_value - 1e-9:
            mism += 1
    report.add(mism == 0, f"uniform-cost greedy matches oracle objective on 100 instances ({mism} mismatches)")

    bad = 0
    for k in range(200):
        inst = _random_hetero_instance(rng)
        if inst is None:
            continue
        cm, w, p = inst
        g = greedy_schedule(cm, w, p)
        u = scheduler.uniform_plan(cm, w, p)
        if not (cm.feasible(g.steps) and cm.maximal(g.steps) and g.objective_value <= u.objective_value + 1e-9):
            bad += 1
    report.add(bad == 0, f"heterogeneous suite: feasible, maximal, <= uniform plan on 200 instances ({bad} bad)")

    alloc = scheduler.continuous_allocation([1.0, 4.0], [0.5, 0.5], 10.0)
    report.add(abs(alloc[0] / alloc[1] - 2.0) < 1e-12, f"sqrt law ratio c=(1,4): {alloc[0]/alloc[1]:.9f}")
    alloc = scheduler.continuous_allocation([1.0, 1.0], [0.8, 0.2], 10.0)
    report.add(abs(alloc[0] / alloc[1] - 0.5) < 1e-12, f"sqrt law ratio w=(0.8,0.2): {alloc[0]/alloc[1]:.9f}")
    return report


def _random_hetero_instance(rng) -> tuple[CostModel, np.ndarray, ScheduleParams] | None:
    """Heterogeneous-cost instance from the scheduler's operating envelope.

    Costs are pairwise separated (sorted neighbor ratio >= 1.3, total spread
    >= 4x), weights uniform, coefficients derived over a run's plausible
    range, and the budget admits at least three uniform steps.  Inside this
    envelope the greedy plan never costs more than the uniform benchmark
    (validated on 150k draws); outside it rare counterexamples exist -- with
    near-identical marginal-rate curves or two-step budgets, the balanced plan
    can win by integer lumpiness (see tests/test_scheduler.py).
    """
    n = int(rng.integers(3, 7))
    ratios = rng.uniform(1.3, 1.9, size=n - 1)
    c = 0.2 * np.concatenate([[1.0], np.cumprod(ratios)])
    if c[-1] / c[0] < 4.0:
        return None
    c = c[rng.permutation(n)]
    b = rng.uniform(0.0, 0.1, size=n)
    m = int(rng.integers(3, 9))
    budget = float(m * c.sum() + b.sum() + rng.uniform(0.0, 0.999 * c.min()))
    w = np.full(n, 1.0 / n)
    eta = float(rng.uniform(0.02, 0.2))
    mu = float(rng.uniform(0.05, 1.0))
    L = float(rng.uniform(0.5, 3.0))
    G = float(rng.uniform(0.5, 3.0))
    g_k = float(rng.uniform(0.01, 2.0)) * G
    params = ScheduleParams.derive(eta, mu, L, G, g_k)
    try:
        return CostModel(tuple(c), tuple(b), budget), w, params
    except scheduler.InfeasibleBudgetError:
        return None


def verify_bounds() -> VerifyReport:
    """Residual-limit check on constant-schedule strongly convex runs, plus a
    schedule-form satisfaction count (diagnostic)."""
    report = VerifyReport("bounds", True)
    ok_runs = 0
    total_runs = 0
    schedule_ok = 0
    schedule_total = 0
    for seed in range(4):
        for t in (1, 2, 3):
            fed = datasets.generate_quadratic_federation(3, 4, 1.0, 100 + seed)
            rng = np.random.default_rng([seed, t, 3])
            w0 = fed.w_star + rng.standard_normal(4)
            radius = 2.0 * float(np.linalg.norm(w0 - fed.w_star)) + fed.heterogeneity + 1.0
            consts = fed.constants(fed.w_star, radius)
            clients = fed.make_clients([1.0] * 3, [0.0] * 3)
            history = run_rounds(
                clients, w0, 0.04, federation.PlainSGDStrategy("fedavg"), fixed_schedule(t),
                rounds=250, w_star=fed.w_star,
            )
            theta = 2.0 * 0.04 * consts.mu * history.traces[0].E
            if not 0 < theta < 1:
                continue
            rho = theta / 2.0
            reports = [recursion_bound_report(tr, consts, rho) for tr in history.traces]
            schedule_total += len(reports)
            schedule_ok += sum(r.schedule_satisfied for r in reports)
            max_delta = max(r.delta_k_young for r in reports)
            limit = federation.residual_limit(max_delta, theta) / (theta - rho)
            late = [tr.error_sq for tr in history.traces[-50:]]
            total_runs += 1
            if max(late) <= 1.1 * limit:
                ok_runs += 1
    report.add(ok_runs == total_runs, f"residual limit held on {ok_runs}/{total_runs} constant-schedule runs")
    report.lines.append(
        f"INFO  schedule-form recursion (diagnostic, not gated): {schedule_ok}/{schedule_total} rounds satisfied"
    )
    return report


def verify_baselines() -> VerifyReport:
    """Strategy identity checks and convergence of every rule."""
    report = VerifyReport("baselines", True)
    for seed in (0, 1):
        fed = datasets.generate_quadratic_federation(4, 3, 1.0, 300 + seed, weights=[0.25] * 4)
        rng = np.random.default_rng([seed, 99])
        w0 = fed.w_star + rng.standard_normal(3)

        def run(strategy, steps=5):
            clients = fed.make_clients([1.0] * 4, [0.0] * 4)
            return run_rounds(
                clients, w0, 0.05, strategy, fixed_schedule(steps), rounds=10, w_star=fed.w_star
            )

        h_avg = run(baselines.FedAvg())
        h_prox = run(baselines.FedProx(0.0))
        identical = all(
            np.array_equal(a.w_end, b.w_end) for a, b in zip(h_avg.traces, h_prox.traces)
        )
        report.add(identical, f"seed {seed}: fedprox(0) trajectories bit-identical to fedavg")

        h_scaf = run(baselines.Scaffold())
        report.add(
            np.array_equal(h_scaf.traces[0].w_end, h_avg.traces[0].w_end),
            f"seed {seed}: scaffold round 1 equals fedavg round 1",
        )

        h_nova = run(baselines.FedNova())
        report.add(
            all(np.array_equal(a.w_end, b.w_end) for a, b in zip(h_avg.traces, h_nova.traces)),
            f"seed {seed}: fednova equals fedavg under equal steps",
        )

    single = datasets.generate_quadratic_federation(1, 1, 0.0, 42, eig_range=(1.0, 1.0))
    for strategy in (
        baselines.FedAvg(),
        baselines.FedProx(0.1),
        baselines.Scaffold(),
        baselines.FedNova(),
        baselines.FedDyn(0.1),
    ):
        clients = single.make_clients([1.0], [0.0])
        history = run_rounds(
            clients, single.w_star + 3.0, 0.1, strategy, fixed_schedule(5),
            rounds=500, w_star=single.w_star,
        )
        err = float(np.linalg.norm(history.w_final - single.w_star))
        report.add(err <= 1e-6, f"{strategy.name} converged to ||e|| = {err:.2e} <= 1e-6")
    return report


VERIFY_SUITES = {
    "identity": verify_identity,
    "gda": verify_gda,
    "scheduler": verify_scheduler,
    "bounds": verify_bounds,
    "baselines": verify_baselines,
}


def verify(suite: str) -> VerifyReport:
    """Run one named property suite with fixed seeds."""
    if suite not in VERIFY_SUITES:
        raise ValueError(f"unknown suite {suite!r}, expected one of {sorted(VERIFY_SUITES)}")
    return VERIFY_SUITES[suite]()
