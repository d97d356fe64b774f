"""Comparison strategies: FedAvg, FedProx, SCAFFOLD, FedNova, FedDyn.

Each strategy is an interchangeable local-update/aggregation rule over the
same round loop, in its standard full-participation full-batch form.  Fixed
variant choices of this artifact: SCAFFOLD uses the option-II variate update
c_i <- c_i - c + (w_global - w_local) / (t eta) with a weighted server
variate; FedDyn uses the first-order dual with the usual server correction
state h (without it the single-client fixed point is biased by the
regularizer).  Baselines run a fixed step count per round (default 5).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .federation import (
    ClientState,
    DivergenceError,
    PlainSGDStrategy,
    Strategy,
    local_multistep_sgd,
    weighted_delta_sum,
)
from .objectives import as_param_vector

BASELINE_KINDS = ("fedavg", "fedprox", "scaffold", "fednova", "feddyn")
DEFAULT_FIXED_STEPS = 5
DEFAULT_MU_PROX = 0.1
DEFAULT_ALPHA_DYN = 0.1


@dataclass(frozen=True)
class StrategySpec:
    """Named strategy with its hyperparameters and fixed per-round steps."""

    kind: str
    fixed_steps: int = DEFAULT_FIXED_STEPS
    mu_prox: float = DEFAULT_MU_PROX
    alpha_dyn: float = DEFAULT_ALPHA_DYN

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS and self.kind != "amsfl":
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.fixed_steps < 1:
            raise ValueError("fixed_steps must be at least 1")
        if self.mu_prox < 0:
            raise ValueError("mu_prox must be nonnegative")
        if self.kind == "feddyn" and self.alpha_dyn <= 0:
            raise ValueError("alpha_dyn must be positive")


def _check_divergence(w: np.ndarray, client_id: str, step: int, limit: float = 1e12):
    if not np.all(np.isfinite(w)) or float(np.linalg.norm(w)) > limit:
        raise DivergenceError(
            f"client {client_id} diverged at local step {step}", client_id=client_id
        )


def local_update_fedprox(
    client: ClientState, w_global, t: int, eta: float, mu_prox: float
) -> np.ndarray:
    """t gradient steps on F_i(w) + (mu_prox/2) ||w - w_global||^2.

    The proximal term is skipped entirely when mu_prox is zero, so the
    trajectory is bit-identical to plain local SGD in that case.
    """
    if mu_prox < 0:
        raise ValueError("mu_prox must be nonnegative")
    obj = client.objective
    w_global = as_param_vector(w_global, obj.dim, "w_global")
    w = w_global.copy()
    for s in range(t):
        g = obj.gradient(w)
        if mu_prox:
            g = g + mu_prox * (w - w_global)
        w = w - eta * g
        _check_divergence(w, client.id, s + 1)
    return w


def local_update_scaffold(
    client: ClientState,
    w_global,
    t: int,
    eta: float,
    client_c: np.ndarray,
    server_c: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Variate-corrected local steps; returns (w_local, updated client variate).

    Each step moves along grad F_i(w) - c_i + c; afterwards the client variate
    is refreshed by the option-II rule c_i <- c_i - c + (w_global - w_local)/(t eta).
    """
    if t * eta == 0:
        raise ValueError("scaffold requires t * eta > 0")
    obj = client.objective
    w_global = as_param_vector(w_global, obj.dim, "w_global")
    w = w_global.copy()
    for s in range(t):
        g = obj.gradient(w) - client_c + server_c
        w = w - eta * g
        _check_divergence(w, client.id, s + 1)
    new_c = client_c - server_c + (w_global - w) / (t * eta)
    return w, new_c


def aggregate_fednova(
    weights, deviations, steps
) -> np.ndarray:
    """Normalized averaging: global step = (sum w_i t_i) * sum_i w_i d_i / t_i.

    Equalizes the contribution of clients with unequal step counts; with equal
    t_i the scales are exactly one and this is plain weighted averaging.
    """
    if any(t < 1 for t in steps):
        raise ValueError("all step counts must be at least 1")
    coeff = float(np.dot(np.asarray(weights, dtype=float), np.asarray(steps, dtype=float)))
    scales = [coeff / t for t in steps]
    return weighted_delta_sum(weights, deviations, scales=scales)


def local_update_feddyn(
    client: ClientState,
    w_global,
    t: int,
    eta: float,
    alpha_dyn: float,
    client_dual: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """t gradient steps on F_i(w) - <dual, w> + (alpha_dyn/2) ||w - w_global||^2,
    then dual <- dual - alpha_dyn (w_local - w_global)."""
    if alpha_dyn <= 0:
        raise ValueError("alpha_dyn must be positive")
    obj = client.objective
    w_global = as_param_vector(w_global, obj.dim, "w_global")
    w = w_global.copy()
    for s in range(t):
        g = obj.gradient(w) - client_dual + alpha_dyn * (w - w_global)
        w = w - eta * g
        _check_divergence(w, client.id, s + 1)
    new_dual = client_dual - alpha_dyn * (w - w_global)
    return w, new_dual


class FedAvg(PlainSGDStrategy):
    def __init__(self):
        super().__init__(name="fedavg")


class FedProx(Strategy):
    name = "fedprox"

    def __init__(self, mu_prox: float = DEFAULT_MU_PROX):
        self.mu_prox = float(mu_prox)
        # With a zero proximal coefficient the rule *is* plain SGD.
        self.plain_sgd = self.mu_prox == 0.0

    def run_round(self, w, clients, steps, eta):
        locals_, drifts = [], []
        for client, t in zip(clients, steps):
            if self.plain_sgd:
                w_i, drift = local_multistep_sgd(client, w, t, eta)
                drifts.append(drift)
            else:
                w_i = local_update_fedprox(client, w, t, eta, self.mu_prox)
            locals_.append(w_i)
        weights = [c.weight for c in clients]
        w_next = w + weighted_delta_sum(weights, [w_i - w for w_i in locals_])
        return w_next, locals_, (drifts if self.plain_sgd else None)


class Scaffold(Strategy):
    name = "scaffold"

    def start_run(self, clients, dim):
        self.server_c = np.zeros(dim)
        self.client_c = {c.id: np.zeros(dim) for c in clients}

    def run_round(self, w, clients, steps, eta):
        locals_, new_variates = [], {}
        for client, t in zip(clients, steps):
            w_i, c_i = local_update_scaffold(
                client, w, t, eta, self.client_c[client.id], self.server_c
            )
            locals_.append(w_i)
            new_variates[client.id] = c_i
        weights = [c.weight for c in clients]
        w_next = w + weighted_delta_sum(weights, [w_i - w for w_i in locals_])
        self.client_c = new_variates
        self.server_c = weighted_delta_sum(weights, [new_variates[c.id] for c in clients])
        return w_next, locals_, None


class FedNova(Strategy):
    name = "fednova"

    def run_round(self, w, clients, steps, eta):
        locals_, drifts = [], []
        for client, t in zip(clients, steps):
            w_i, drift = local_multistep_sgd(client, w, t, eta)
            locals_.append(w_i)
            drifts.append(drift)
        weights = [c.weight for c in clients]
        update = aggregate_fednova(weights, [w_i - w for w_i in locals_], steps)
        return w + update, locals_, drifts


class FedDyn(Strategy):
    name = "feddyn"

    def __init__(self, alpha_dyn: float = DEFAULT_ALPHA_DYN):
        if alpha_dyn <= 0:
            raise ValueError("alpha_dyn must be positive")
        self.alpha_dyn = float(alpha_dyn)

    def start_run(self, clients, dim):
        self.duals = {c.id: np.zeros(dim) for c in clients}
        self.h = np.zeros(dim)

    def run_round(self, w, clients, steps, eta):
        locals_ = []
        for client, t in zip(clients, steps):
            w_i, dual = local_update_feddyn(
                client, w, t, eta, self.alpha_dyn, self.duals[client.id]
            )
            locals_.append(w_i)
            self.duals[client.id] = dual
        weights = [c.weight for c in clients]
        mean_delta = weighted_delta_sum(weights, [w_i - w for w_i in locals_])
        self.h = self.h - self.alpha_dyn * mean_delta
        w_next = (w + mean_delta) - self.h / self.alpha_dyn
        return w_next, locals_, None


def build_strategy(spec: StrategySpec) -> Strategy:
    """Instantiate the strategy named by a spec (amsfl shares the plain rule)."""
    if spec.kind == "fedavg":
        return FedAvg()
    if spec.kind == "amsfl":
        return PlainSGDStrategy(name="amsfl")
    if spec.kind == "fedprox":
        return FedProx(spec.mu_prox)
    if spec.kind == "scaffold":
        return Scaffold()
    if spec.kind == "fednova":
        return FedNova()
    if spec.kind == "feddyn":
        return FedDyn(spec.alpha_dyn)
    raise ValueError(f"unknown strategy kind {spec.kind!r}")
