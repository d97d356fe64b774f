"""Gradient-difference curvature probes and local drift accounting.

The gradient difference g(w + delta) - g(w) is a Hessian-free stand-in for
the Hessian-vector product H(w) delta; its remainder is second order in
||delta|| with constant L/2 on any segment where the gradient is L-Lipschitz.
This module computes the probe, checks that remainder bound against the exact
Hessian oracle, and accumulates per-step gradient drift along local SGD
trajectories under both summation conventions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .objectives import Objective, as_param_vector

logger = logging.getLogger(__name__)

# Tolerance absorbed into the "satisfied" flag to cover float accumulation.
REMAINDER_ABS_TOL = 1e-12
REMAINDER_REL_TOL = 1e-9

DRIFT_CONVENTIONS = ("single_sum", "double_sum")


@dataclass
class DriftRecord:
    """Per-step gradient deviations along one client's local trajectory.

    Entry t is the gradient at local step t minus the gradient at the round's
    broadcast model, so entry 0 is exactly zero.  ``cumulative`` is the plain
    sum of entries (the single-sum convention used by the error identity).
    """

    per_step: list[np.ndarray]
    cumulative: np.ndarray = field(init=False)

    def __post_init__(self):
        if not self.per_step:
            raise ValueError("per_step must be nonempty")
        self.per_step = [np.asarray(v, dtype=float) for v in self.per_step]
        dim = self.per_step[0].shape
        if any(v.shape != dim for v in self.per_step):
            raise ValueError("per_step entries have mismatched dimensions")
        self.cumulative = accumulate_drift(self.per_step, "single_sum")

    @property
    def steps(self) -> int:
        return len(self.per_step)

    def accumulated(self, convention: str = "single_sum") -> np.ndarray:
        return accumulate_drift(self.per_step, convention)


@dataclass(frozen=True)
class GdaReport:
    """Outcome of one remainder check: ||g(w+d) - g(w) - H(w)d|| vs (L/2)||d||^2."""

    remainder_norm: float
    bound: float
    satisfied: bool


def gradient_difference(obj: Objective, w, delta) -> np.ndarray:
    """First-order curvature probe g(w + delta) - g(w).

    Warns (does not fail) when either endpoint leaves the objective's declared
    evaluation region, since smoothness constants are only valid inside it.
    """
    w = as_param_vector(w, obj.dim, "w")
    delta = as_param_vector(delta, obj.dim, "delta")
    shifted = w + delta
    if not (obj.in_region(w) and obj.in_region(shifted)):
        logger.warning(
            "gradient_difference endpoints leave the declared region "
            "(||w||=%.3g, ||w+delta||=%.3g, radius=%s)",
            np.linalg.norm(w),
            np.linalg.norm(shifted),
            obj.region_radius,
        )
    return obj.gradient(shifted) - obj.gradient(w)


def gda_remainder(obj: Objective, w, delta, L: float) -> GdaReport:
    """Check the second-order remainder of the gradient-difference probe.

    L must be a gradient-Lipschitz constant valid on the segment [w, w+delta].
    """
    if L < 0:
        raise ValueError(f"invalid Lipschitz constant L={L}")
    delta = as_param_vector(delta, obj.dim, "delta")
    diff = gradient_difference(obj, w, delta)
    hv = obj.hessian_vector(w, delta)
    remainder = float(np.linalg.norm(diff - hv))
    bound = 0.5 * L * float(delta @ delta)
    tol = REMAINDER_ABS_TOL + REMAINDER_REL_TOL * bound
    if L == 0 and remainder > tol:
        raise ValueError("L=0 is not a valid Lipschitz constant for this objective")
    return GdaReport(remainder_norm=remainder, bound=bound, satisfied=remainder <= bound + tol)


def accumulate_drift(per_step, convention: str = "single_sum") -> np.ndarray:
    """Accumulate per-step gradient deviations into a single drift vector.

    single_sum: sum_t d_t  (the convention consistent with the exact error
    identity; default).
    double_sum: sum_{t=0}^{T-1} sum_{j=1}^{t} d_j, i.e. entry j weighted by
    (T - j); retained for comparison.
    """
    if convention not in DRIFT_CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}, expected one of {DRIFT_CONVENTIONS}")
    entries = [np.asarray(v, dtype=float) for v in per_step]
    if not entries:
        raise ValueError("per_step must be nonempty")
    dim = entries[0].shape
    if any(v.shape != dim for v in entries):
        raise ValueError("per_step entries have mismatched dimensions")
    if convention == "single_sum":
        return np.sum(entries, axis=0)
    T = len(entries)
    out = np.zeros(dim)
    for j in range(1, T):
        out += (T - j) * entries[j]
    return out


def drift_bound(t_i: int, L: float, G: float) -> float:
    """Closed-form cap (L*G/2) * t(t-1) on the accumulated drift norm.

    Note: SGD trajectories with step size eta actually satisfy the tighter
    eta-scaled version eta*(L*G/2)*t(t-1); this returns the unscaled form and
    callers multiply by eta where the trajectory-level inequality is asserted.
    """
    if t_i < 1:
        raise ValueError("t_i must be at least 1")
    if L < 0 or G < 0:
        raise ValueError("L and G must be nonnegative")
    return 0.5 * L * G * t_i * (t_i - 1)
