"""Deterministic federated-learning simulation engine.

Exact-oracle objectives, gradient-difference curvature probes, a multi-step
round loop with verifiable error propagation, time-budgeted greedy step
scheduling, five baseline strategies, non-IID data tooling and an experiment
harness.
"""

from .baselines import (
    FedAvg,
    FedDyn,
    FedNova,
    FedProx,
    Scaffold,
    StrategySpec,
    aggregate_fednova,
    build_strategy,
    local_update_feddyn,
    local_update_fedprox,
    local_update_scaffold,
)
from .datasets import (
    PartitionSpec,
    SyntheticFederation,
    TabularDataset,
    generate_logistic_federation,
    generate_quadratic_federation,
    load_csv,
    partition_noniid,
)
from .federation import (
    BoundReport,
    ClientState,
    DivergenceError,
    PlainSGDStrategy,
    RoundTrace,
    RunHistory,
    aggregate,
    error_identity_check,
    fixed_schedule,
    local_multistep_sgd,
    recursion_bound_report,
    residual_limit,
    run_rounds,
)
from .gda import (
    DriftRecord,
    GdaReport,
    accumulate_drift,
    drift_bound,
    gda_remainder,
    gradient_difference,
)
from .harness import (
    AdaptiveSchedule,
    ExperimentConfig,
    run_experiment,
    time_to_target,
    verify,
)
from .objectives import (
    Logistic,
    Objective,
    Quadratic,
    Quartic,
    SmoothnessConstants,
    as_param_vector,
)
from .scheduler import (
    CostModel,
    ScheduleParams,
    StepPlan,
    brute_force_schedule,
    continuous_allocation,
    error_cost,
    greedy_schedule,
    uniform_plan,
)

__version__ = "0.1.0"
