"""Deterministic loss functions with exact first- and second-order oracles.

Every objective exposes full-batch ``value``, ``gradient``, ``hessian_vector``
and (for convenience in verification code) a dense ``hessian``.  All oracles
are analytic, never finite-difference, so they can serve as ground truth when
checking first-order approximations.  Each kind also reports closed-form
smoothness constants (L, mu, G) valid on a stated ball; these are exact for
quadratics and conservative over-approximations otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    """Input vector length does not match the objective's dimension."""


@dataclass(frozen=True)
class SmoothnessConstants:
    """Gradient-Lipschitz constant, strong-convexity modulus and gradient
    norm bound, all valid on the region they were computed for."""

    L: float
    mu: float
    G: float

    def __post_init__(self):
        if self.mu > self.L + 1e-12:
            raise ValueError(f"mu={self.mu} exceeds L={self.L}")
        if min(self.L, self.mu, self.G) < 0:
            raise ValueError("smoothness constants must be nonnegative")


def as_param_vector(w, dim: int | None = None, name: str = "w") -> np.ndarray:
    """Validate and convert a model point to a 1-D float64 array."""
    arr = np.asarray(w, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be a vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(
            f"{name} has length {arr.shape[0]}, expected {dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


class Objective:
    """Base class for full-batch objectives on R^d.

    Subclasses may declare an evaluation region (ball) via ``region_center``
    and ``region_radius``; consumers use it for advisory out-of-region
    warnings, never to clamp evaluation.
    """

    dim: int
    region_center: np.ndarray | None = None
    region_radius: float | None = None

    def value(self, w) -> float:
        raise NotImplementedError

    def gradient(self, w) -> np.ndarray:
        raise NotImplementedError

    def hessian_vector(self, w, delta) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, w) -> np.ndarray:
        raise NotImplementedError

    def smoothness_constants(self, region_radius: float, region_center) -> SmoothnessConstants:
        raise NotImplementedError

    def minimizer(self) -> np.ndarray | None:
        """Known minimizer if one exists in closed form, else None."""
        return None

    def in_region(self, w) -> bool:
        """True if w lies in the declared region (vacuously true without one)."""
        if self.region_center is None or self.region_radius is None:
            return True
        w = as_param_vector(w, self.dim)
        return float(np.linalg.norm(w - self.region_center)) <= self.region_radius + 1e-12

    def _check(self, w, name="w") -> np.ndarray:
        return as_param_vector(w, self.dim, name)


class Quadratic(Objective):
    """F(w) = 1/2 w'Aw - b'w + offset with symmetric PSD A.

    The constant Hessian makes every bound in the verification suites exact:
    gradient differences equal Hessian-vector products to machine precision.
    """

    def __init__(self, A, b, offset: float = 0.0):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if not np.allclose(A, A.T, rtol=1e-10, atol=1e-12):
            raise ValueError("A must be symmetric")
        self.A = A
        self.dim = A.shape[0]
        self.b = as_param_vector(b, self.dim, "b")
        self.offset = float(offset)
        eigs = np.linalg.eigvalsh(A)
        if eigs[0] < -1e-10 * max(1.0, eigs[-1]):
            raise ValueError(f"A must be positive semidefinite, min eig {eigs[0]}")
        self._eig_min = float(max(eigs[0], 0.0))
        self._eig_max = float(max(eigs[-1], 0.0))

    @classmethod
    def centered(cls, A, center) -> "Quadratic":
        """Build F(w) = 1/2 (w - m)'A(w - m), which is zero at its minimizer."""
        A = np.asarray(A, dtype=float)
        m = as_param_vector(center, A.shape[0], "center")
        return cls(A, A @ m, offset=0.5 * float(m @ A @ m))

    def value(self, w) -> float:
        w = self._check(w)
        return 0.5 * float(w @ self.A @ w) - float(self.b @ w) + self.offset

    def gradient(self, w) -> np.ndarray:
        w = self._check(w)
        return self.A @ w - self.b

    def hessian_vector(self, w, delta) -> np.ndarray:
        self._check(w)
        delta = as_param_vector(delta, self.dim, "delta")
        return self.A @ delta

    def hessian(self, w) -> np.ndarray:
        self._check(w)
        return self.A.copy()

    def smoothness_constants(self, region_radius, region_center) -> SmoothnessConstants:
        if region_radius <= 0:
            raise ValueError("region_radius must be positive")
        c = as_param_vector(region_center, self.dim, "region_center")
        # L and mu are the extreme eigenvalues, exact everywhere.
        G = float(np.linalg.norm(self.A @ c - self.b)) + region_radius * self._eig_max
        return SmoothnessConstants(L=self._eig_max, mu=self._eig_min, G=G)

    def minimizer(self) -> np.ndarray:
        return np.linalg.solve(self.A, self.b)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class Logistic(Objective):
    """Ridge-regularized binary logistic loss over fixed features and labels.

    F(w) = mean_i log(1 + exp(-y_i x_i'w)) + ridge/2 ||w||^2, labels in {-1,+1}.
    """

    def __init__(self, features, labels, ridge: float = 0.0):
        X = np.asarray(features, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {X.shape}")
        y = np.asarray(labels, dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError("labels length must match feature rows")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        if ridge < 0:
            raise ValueError("ridge must be nonnegative")
        self.X = X
        self.y = y
        self.ridge = float(ridge)
        self.dim = X.shape[1]
        self.n = X.shape[0]

    def _margins(self, w: np.ndarray) -> np.ndarray:
        return self.y * (self.X @ w)

    def value(self, w) -> float:
        w = self._check(w)
        m = self._margins(w)
        return float(np.mean(np.logaddexp(0.0, -m))) + 0.5 * self.ridge * float(w @ w)

    def gradient(self, w) -> np.ndarray:
        w = self._check(w)
        s = _sigmoid(-self._margins(w))
        return -(self.X.T @ (self.y * s)) / self.n + self.ridge * w

    def hessian_vector(self, w, delta) -> np.ndarray:
        w = self._check(w)
        delta = as_param_vector(delta, self.dim, "delta")
        s = _sigmoid(self._margins(w))
        q = s * (1.0 - s)
        return self.X.T @ (q * (self.X @ delta)) / self.n + self.ridge * delta

    def hessian(self, w) -> np.ndarray:
        w = self._check(w)
        s = _sigmoid(self._margins(w))
        q = s * (1.0 - s)
        return (self.X.T * q) @ self.X / self.n + self.ridge * np.eye(self.dim)

    def smoothness_constants(self, region_radius, region_center) -> SmoothnessConstants:
        """Closed-form conservative bounds: the logistic curvature factor is at
        most 1/4, so L <= lam_max(X'X)/(4n) + ridge globally; mu falls back to
        the ridge; G bounds per-sample terms by ||x_i|| plus the ridge part."""
        if region_radius <= 0:
            raise ValueError("region_radius must be positive")
        c = as_param_vector(region_center, self.dim, "region_center")
        lam_max = float(np.linalg.eigvalsh(self.X.T @ self.X)[-1])
        L = lam_max / (4.0 * self.n) + self.ridge
        G = float(np.mean(np.linalg.norm(self.X, axis=1))) + self.ridge * (
            float(np.linalg.norm(c)) + region_radius
        )
        return SmoothnessConstants(L=L, mu=self.ridge, G=G)


class Quartic(Objective):
    """F(w) = scale * ||w - center||^4, a strictly convex non-quadratic test
    function whose Hessian varies with w (so first-order curvature probes have
    a genuinely nonzero remainder)."""

    def __init__(self, center, scale: float):
        self.center = as_param_vector(center, None, "center")
        self.dim = self.center.shape[0]
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    def value(self, w) -> float:
        u = self._check(w) - self.center
        return self.scale * float(u @ u) ** 2

    def gradient(self, w) -> np.ndarray:
        u = self._check(w) - self.center
        return 4.0 * self.scale * float(u @ u) * u

    def hessian_vector(self, w, delta) -> np.ndarray:
        u = self._check(w) - self.center
        delta = as_param_vector(delta, self.dim, "delta")
        return 4.0 * self.scale * (float(u @ u) * delta + 2.0 * float(u @ delta) * u)

    def hessian(self, w) -> np.ndarray:
        u = self._check(w) - self.center
        return 4.0 * self.scale * (float(u @ u) * np.eye(self.dim) + 2.0 * np.outer(u, u))

    def smoothness_constants(self, region_radius, region_center) -> SmoothnessConstants:
        # Hessian eigenvalues at w are 4s||u||^2 (multiplicity d-1) and
        # 12s||u||^2 along u, with u = w - center; extremize ||u|| over the ball.
        if region_radius <= 0:
            raise ValueError("region_radius must be positive")
        c = as_param_vector(region_center, self.dim, "region_center")
        dist = float(np.linalg.norm(c - self.center))
        u_max = dist + region_radius
        u_min = max(0.0, dist - region_radius)
        return SmoothnessConstants(
            L=12.0 * self.scale * u_max**2,
            mu=4.0 * self.scale * u_min**2,
            G=4.0 * self.scale * u_max**3,
        )

    def minimizer(self) -> np.ndarray:
        return self.center.copy()
