"""Synthetic federated tasks with known optima, non-IID partitioning of
tabular data, and CSV ingestion with a declared schema.

Synthetic generators draw everything from one seeded generator in a fixed
order, so a federation is reproducible byte-for-byte from its seed.  The
quadratic generator has a closed-form weighted optimum; the logistic
generator obtains its optimum by Newton's method on the exact oracles.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .federation import ClientState
from .objectives import Logistic, Objective, Quadratic, SmoothnessConstants, as_param_vector

logger = logging.getLogger(__name__)

PARTITION_METHODS = ("label_skew", "dirichlet", "shard")


class EmptyPartitionError(ValueError):
    """A partition method produced a client with no samples."""


class SchemaError(ValueError):
    """CSV schema violation (malformed row, unknown category, arity mismatch)."""


@dataclass
class SyntheticFederation:
    """N client objectives with weights and the exact weighted optimum."""

    objectives: list[Objective]
    weights: np.ndarray
    w_star: np.ndarray
    heterogeneity: float
    features: list[np.ndarray] | None = None
    labels: list[np.ndarray] | None = None

    @property
    def n_clients(self) -> int:
        return len(self.objectives)

    @property
    def dim(self) -> int:
        return self.objectives[0].dim

    def global_value(self, w) -> float:
        return float(sum(wt * obj.value(w) for wt, obj in zip(self.weights, self.objectives)))

    def global_gradient(self, w) -> np.ndarray:
        acc = np.zeros(self.dim)
        for wt, obj in zip(self.weights, self.objectives):
            acc = acc + wt * obj.gradient(w)
        return acc

    def global_accuracy(self, w) -> float | None:
        """Weighted sign-prediction accuracy; None for non-classification tasks."""
        if self.features is None or self.labels is None:
            return None
        w = as_param_vector(w, self.dim)
        acc = 0.0
        for wt, X, y in zip(self.weights, self.features, self.labels):
            pred = np.where(X @ w >= 0, 1.0, -1.0)
            acc += wt * float(np.mean(pred == y))
        return acc

    def constants(self, region_center, region_radius: float) -> SmoothnessConstants:
        """Federation-level constants on a ball: L and G are the per-client
        maxima (uniform bounds), mu is the weighted average of per-client
        strong-convexity moduli."""
        per = [obj.smoothness_constants(region_radius, region_center) for obj in self.objectives]
        return SmoothnessConstants(
            L=max(c.L for c in per),
            mu=float(np.dot(self.weights, [c.mu for c in per])),
            G=max(c.G for c in per),
        )

    def make_clients(self, step_costs, comm_delays) -> list[ClientState]:
        return [
            ClientState(
                id=f"client{i}",
                weight=float(self.weights[i]),
                objective=obj,
                step_cost=float(step_costs[i]),
                comm_delay=float(comm_delays[i]),
            )
            for i, obj in enumerate(self.objectives)
        ]


def _ball_point(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    """Uniform draw from the ball of the given radius."""
    v = rng.standard_normal(dim)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return np.zeros(dim)
    r = radius * rng.uniform() ** (1.0 / dim)
    return (r / norm) * v


def _random_spd(rng: np.random.Generator, dim: int, eig_range: tuple[float, float]) -> np.ndarray:
    lo, hi = eig_range
    if not 0 <= lo <= hi:
        raise ValueError(f"invalid eigenvalue range {eig_range}")
    if dim == 1:
        return np.array([[rng.uniform(lo, hi)]])
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = rng.uniform(lo, hi, size=dim)
    return (Q * eigs) @ Q.T


def _normalized_weights(weights, n: int) -> np.ndarray:
    if weights is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,) or np.any(w <= 0):
        raise ValueError("weights must be positive and match the client count")
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
    return w


def generate_quadratic_federation(
    n_clients: int,
    dim: int,
    heterogeneity: float,
    seed: int,
    *,
    eig_range: tuple[float, float] = (0.5, 2.0),
    weights=None,
) -> SyntheticFederation:
    """Per-client curvatures A_i with eigenvalues in eig_range and minimizers
    m_i within ``heterogeneity`` of a common center; the exact weighted
    optimum is (sum w_i A_i)^-1 (sum w_i A_i m_i).

    Draw order per client: A_i, then m_i offset.  If the aggregate curvature
    is numerically singular the federation is regenerated from a shifted seed
    (logged).
    """
    if n_clients < 1 or dim < 1:
        raise ValueError("n_clients and dim must be at least 1")
    if heterogeneity < 0:
        raise ValueError("heterogeneity must be nonnegative")
    w = _normalized_weights(weights, n_clients)
    for attempt in range(5):
        rng = np.random.default_rng(seed + 1_000_003 * attempt)
        mats, centers = [], []
        for _ in range(n_clients):
            mats.append(_random_spd(rng, dim, eig_range))
            centers.append(_ball_point(rng, dim, heterogeneity))
        agg = sum(wi * A for wi, A in zip(w, mats))
        if np.linalg.cond(agg) > 1e12:
            logger.warning("singular aggregate curvature for seed %s, regenerating", seed)
            continue
        w_star = np.linalg.solve(agg, sum(wi * A @ m for wi, A, m in zip(w, mats, centers)))
        objectives = [Quadratic.centered(A, m) for A, m in zip(mats, centers)]
        return SyntheticFederation(
            objectives=objectives, weights=w, w_star=w_star, heterogeneity=heterogeneity
        )
    raise RuntimeError(f"could not generate a well-conditioned federation from seed {seed}")


def newton_minimize(
    value_grad_hess: Objective | None = None,
    *,
    gradient=None,
    hessian=None,
    w0=None,
    dim: int | None = None,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> np.ndarray:
    """Newton's method with exact Hessians; used to pin optima of smooth
    strongly convex tasks to near machine precision."""
    if value_grad_hess is not None:
        gradient = value_grad_hess.gradient
        hessian = value_grad_hess.hessian
        dim = value_grad_hess.dim
    w = np.zeros(dim) if w0 is None else as_param_vector(w0, dim).copy()
    for _ in range(max_iter):
        g = gradient(w)
        if float(np.linalg.norm(g)) <= tol:
            return w
        w = w - np.linalg.solve(hessian(w), g)
    if float(np.linalg.norm(gradient(w))) > 1e-8:
        raise RuntimeError("Newton solve did not converge")
    return w


def generate_logistic_federation(
    n_clients: int,
    dim: int,
    heterogeneity: float,
    seed: int,
    *,
    samples_per_client: int = 40,
    ridge: float = 0.1,
    feature_scale_range: tuple[float, float] = (1.0, 1.0),
    weights=None,
) -> SyntheticFederation:
    """Binary logistic clients with heterogeneous generating vectors (spread
    ``heterogeneity`` around a common direction) and optional per-client
    feature scaling; the weighted optimum comes from a Newton solve.

    Draw order per client: features, generating-vector offset, label noise.
    """
    if samples_per_client < 1:
        raise ValueError("samples_per_client must be at least 1")
    if ridge <= 0:
        raise ValueError("ridge must be positive so the optimum is unique")
    w = _normalized_weights(weights, n_clients)
    rng = np.random.default_rng(seed)
    base = rng.standard_normal(dim)
    base *= 2.0 / max(float(np.linalg.norm(base)), 1e-12)
    objectives, feats, labs = [], [], []
    for i in range(n_clients):
        scale = rng.uniform(*feature_scale_range)
        X = scale * rng.standard_normal((samples_per_client, dim))
        v = base + _ball_point(rng, dim, heterogeneity)
        p = 1.0 / (1.0 + np.exp(-(X @ v)))
        y = np.where(rng.uniform(size=samples_per_client) < p, 1.0, -1.0)
        if np.all(y == y[0]):
            y[0] = -y[0]  # keep both classes present
        objectives.append(Logistic(X, y, ridge=ridge))
        feats.append(X)
        labs.append(y)

    def grad(x):
        return sum(wi * obj.gradient(x) for wi, obj in zip(w, objectives))

    def hess(x):
        return sum(wi * obj.hessian(x) for wi, obj in zip(w, objectives))

    w_star = newton_minimize(gradient=grad, hessian=hess, dim=dim)
    return SyntheticFederation(
        objectives=objectives,
        weights=w,
        w_star=w_star,
        heterogeneity=heterogeneity,
        features=feats,
        labels=labs,
    )


# ---------------------------------------------------------------------------
# Tabular data
# ---------------------------------------------------------------------------


@dataclass
class TabularDataset:
    """Dense feature matrix with integer class labels."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels)
        if self.features.ndim != 2:
            raise ValueError("features must be 2-D")
        if self.labels.shape[0] != self.features.shape[0]:
            raise ValueError("labels length must match feature rows")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "TabularDataset":
        idx = np.asarray(indices, dtype=int)
        return TabularDataset(self.features[idx], self.labels[idx], self.feature_names)


@dataclass(frozen=True)
class PartitionSpec:
    """How to split a dataset across clients: label_skew(classes_per_client),
    dirichlet(concentration) or shard(shards_per_client)."""

    method: str
    n_clients: int
    seed: int
    classes_per_client: int | None = None
    concentration: float | None = None
    shards_per_client: int | None = None

    def __post_init__(self):
        if self.method not in PARTITION_METHODS:
            raise ValueError(f"unknown partition method {self.method!r}")
        if self.n_clients < 1:
            raise ValueError("n_clients must be at least 1")
        if self.method == "label_skew" and (self.classes_per_client or 0) < 1:
            raise ValueError("label_skew requires classes_per_client >= 1")
        if self.method == "dirichlet" and (self.concentration or 0) <= 0:
            raise ValueError("dirichlet requires concentration > 0")
        if self.method == "shard" and (self.shards_per_client or 0) < 1:
            raise ValueError("shard requires shards_per_client >= 1")


def _check_nonempty(counts, spec: PartitionSpec):
    for i, c in enumerate(counts):
        if c == 0:
            raise EmptyPartitionError(
                f"client {i} received no samples under {spec.method} (seed {spec.seed})"
            )


def partition_noniid(data: TabularDataset, spec: PartitionSpec) -> list[TabularDataset]:
    """Deterministically split a dataset into disjoint covering client shards."""
    if spec.n_clients > data.n:
        raise ValueError("more clients than samples")
    rng = np.random.default_rng(spec.seed)
    classes = np.unique(data.labels)
    by_class = {c: np.flatnonzero(data.labels == c) for c in classes}
    assignments: list[list[int]] = [[] for _ in range(spec.n_clients)]

    if spec.method == "label_skew":
        cpc = spec.classes_per_client
        claims = {c: [] for c in classes}
        for i in range(spec.n_clients):
            for j in range(cpc):
                claims[classes[(i * cpc + j) % len(classes)]].append(i)
        for c in classes:
            idx = by_class[c].copy()
            rng.shuffle(idx)
            owners = claims[c]
            if not owners:
                owners = [int(rng.integers(spec.n_clients))]
            for k, chunk in enumerate(np.array_split(idx, len(owners))):
                assignments[owners[k]].extend(chunk.tolist())
    elif spec.method == "dirichlet":
        for c in classes:
            idx = by_class[c].copy()
            rng.shuffle(idx)
            props = rng.dirichlet(np.full(spec.n_clients, spec.concentration))
            counts = np.floor(props * len(idx)).astype(int)
            counts[int(np.argmax(props))] += len(idx) - int(counts.sum())
            start = 0
            for i, cnt in enumerate(counts):
                assignments[i].extend(idx[start : start + cnt].tolist())
                start += cnt
    else:  # shard
        order = np.argsort(data.labels, kind="stable")
        shards = np.array_split(order, spec.n_clients * spec.shards_per_client)
        shard_ids = rng.permutation(len(shards))
        for i in range(spec.n_clients):
            for s in shard_ids[i * spec.shards_per_client : (i + 1) * spec.shards_per_client]:
                assignments[i].extend(shards[s].tolist())

    _check_nonempty([len(a) for a in assignments], spec)
    total = sum(len(a) for a in assignments)
    if total != data.n:
        raise AssertionError(f"partition lost samples: {total} != {data.n}")
    return [data.subset(sorted(a)) for a in assignments]


def load_schema(path) -> dict:
    """Read a JSON sidecar describing column kinds and the label column."""
    with open(path) as fh:
        schema = json.load(fh)
    if "columns" not in schema or "label" not in schema:
        raise SchemaError("schema must declare 'columns' and 'label'")
    for col in schema["columns"]:
        if col.get("kind") not in ("numeric", "categorical"):
            raise SchemaError(f"column {col.get('name')!r}: kind must be numeric or categorical")
        if col["kind"] == "categorical" and not col.get("categories"):
            raise SchemaError(f"column {col.get('name')!r}: categorical needs categories")
    schema.setdefault("unknown_category", "error")
    if schema["unknown_category"] not in ("error", "zero"):
        raise SchemaError("unknown_category must be 'error' or 'zero'")
    return schema


def load_csv(path, schema) -> TabularDataset:
    """Parse a comma-separated file against a declared schema.

    Numeric columns parse as floats; categorical columns one-hot encode in
    the declared category order; the label column maps through the declared
    mapping.  Column order in the output is the schema's column order.
    """
    if isinstance(schema, (str, Path)):
        schema = load_schema(schema)
    columns = schema["columns"]
    label_spec = schema["label"]
    label_name = label_spec["name"]
    mapping = label_spec.get("mapping")
    unknown = schema.get("unknown_category", "error")

    names = [c["name"] for c in columns] + [label_name]
    feature_names: list[str] = []
    for col in columns:
        if col["kind"] == "numeric":
            feature_names.append(col["name"])
        else:
            feature_names.extend(f"{col['name']}={cat}" for cat in col["categories"])

    rows, labels = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        if [h.strip() for h in header] != names:
            raise SchemaError(
                f"{path}: header {header} does not match schema columns {names}"
            )
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(names):
                raise SchemaError(f"{path}:{lineno}: expected {len(names)} fields, got {len(row)}")
            feats: list[float] = []
            for col, raw in zip(columns, row):
                raw = raw.strip()
                if col["kind"] == "numeric":
                    try:
                        feats.append(float(raw))
                    except ValueError:
                        raise SchemaError(
                            f"{path}:{lineno}: column {col['name']!r}: not numeric: {raw!r}"
                        ) from None
                else:
                    cats = col["categories"]
                    onehot = [0.0] * len(cats)
                    if raw in cats:
                        onehot[cats.index(raw)] = 1.0
                    elif unknown == "error":
                        raise SchemaError(
                            f"{path}:{lineno}: column {col['name']!r}: unknown category {raw!r}"
                        )
                    feats.extend(onehot)
            raw_label = row[-1].strip()
            if mapping is not None:
                if raw_label not in mapping:
                    raise SchemaError(f"{path}:{lineno}: unmapped label {raw_label!r}")
                labels.append(int(mapping[raw_label]))
            else:
                try:
                    labels.append(int(raw_label))
                except ValueError:
                    raise SchemaError(f"{path}:{lineno}: label not an integer: {raw_label!r}") from None
            rows.append(feats)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return TabularDataset(np.array(rows, dtype=float), np.array(labels), feature_names)


def minmax_stats(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column-wise (min, max) of a training split."""
    X = np.asarray(features, dtype=float)
    return X.min(axis=0), X.max(axis=0)


def apply_minmax(features: np.ndarray, stats: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """Scale columns to [0, 1] with the given training-split statistics;
    constant columns map to zero."""
    lo, hi = stats
    span = np.where(hi > lo, hi - lo, 1.0)
    return (np.asarray(features, dtype=float) - lo) / span


def logistic_clients_from_partitions(
    parts: list[TabularDataset],
    *,
    ridge: float,
    positive_labels,
    weights: str = "data",
) -> tuple[list[Logistic], np.ndarray, list[np.ndarray], list[np.ndarray]]:
    """Build per-client logistic objectives from partitions, mapping declared
    positive classes to +1 and all others to -1.  Weights are data-proportional
    by default."""
    positive = set(positive_labels)
    objectives, feats, labs = [], [], []
    for part in parts:
        y = np.where(np.isin(part.labels, list(positive)), 1.0, -1.0)
        objectives.append(Logistic(part.features, y, ridge=ridge))
        feats.append(part.features)
        labs.append(y)
    if weights == "data":
        sizes = np.array([p.n for p in parts], dtype=float)
        w = sizes / sizes.sum()
    elif weights == "uniform":
        w = np.full(len(parts), 1.0 / len(parts))
    else:
        raise ValueError(f"unknown weight rule {weights!r}")
    return objectives, w, feats, labs
