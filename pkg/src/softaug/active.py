"""Training-set selection: clustering warm start plus greedy acquisition.

The initial labeled set comes from k-means (one representative per
cluster); afterwards points are acquired one at a time by the score

    score(n) = d_x(n) * d_y(n) / R(n)

where d_x is the distance to the nearest labeled point, d_y the smallest
gap between the current model's prediction f(x_n) and any labeled label,
and R the total distance from n to every pool point (labeled or not).
Large d_x, d_y favour diversity; small R favours representative points.
The model f is refitted after every acquisition.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import TabularDataset
from .errors import BudgetError, ContractError, DegeneracyError
from .regress import KernelRidgeRegressor, RegressorSpec
from .rng import SeededRng, derive_seed

LLOYD_TOL = 1e-6
LLOYD_MAX_ITER = 100


@dataclass
class ClusterResult:
    centroids: np.ndarray          # (k, d)
    assignments: np.ndarray        # (m,) int
    inertia: float


@dataclass(frozen=True)
class LabelBudget:
    initial: int | None            # None: pick by silhouette
    total: int

    def __post_init__(self):
        if self.initial is not None and self.initial < 2:
            raise BudgetError(f"initial labeled count must be >= 2, got {self.initial}")
        if self.initial is not None and self.total < self.initial:
            raise BudgetError(
                f"total budget {self.total} below initial count {self.initial}")


@dataclass
class AcquisitionRecord:
    step: int
    index: int
    d_x: float
    d_y: float
    r: float
    score: float


# ------------------------------------------------------------------ k-means

def kmeans(points: np.ndarray, k: int, seed: int) -> ClusterResult:
    """Seeded k-means++ start, Lloyd iterations to a 1e-6 shift or 100 rounds."""
    points = np.asarray(points, dtype=float)
    m = points.shape[0]
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    distinct = np.unique(points, axis=0).shape[0]
    if k > distinct:
        raise DegeneracyError(f"k={k} exceeds {distinct} distinct points")
    rng = SeededRng(seed)
    centroids = _kmeans_pp(points, k, rng)
    for _ in range(LLOYD_MAX_ITER):
        d2 = _sq_dists(points, centroids)
        assign = np.argmin(d2, axis=1)          # ties go to the lowest centroid
        new_centroids = centroids.copy()
        for c in range(k):
            members = points[assign == c]
            if len(members):
                new_centroids[c] = members.mean(axis=0)
        # an emptied cluster grabs the point farthest from its centroid
        for c in range(k):
            if not np.any(assign == c):
                worst = int(np.argmax(np.min(_sq_dists(points, new_centroids), axis=1)))
                new_centroids[c] = points[worst]
                assign[worst] = c
        shift = float(np.max(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1))))
        centroids = new_centroids
        if shift < LLOYD_TOL:
            break
    d2 = _sq_dists(points, centroids)
    assign = np.argmin(d2, axis=1)
    inertia = float(np.sum(d2[np.arange(m), assign]))
    return ClusterResult(centroids, assign, inertia)


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sum(diff * diff, axis=2)


def _kmeans_pp(points: np.ndarray, k: int, rng: SeededRng) -> np.ndarray:
    m = points.shape[0]
    first = int(rng.integers(0, m, 1)[0])
    centroids = [points[first]]
    for _ in range(1, k):
        d2 = np.min(_sq_dists(points, np.array(centroids)), axis=1)
        if d2.sum() <= 0.0:
            # all mass on existing centroids; take the first uncovered point
            remaining = np.where(d2 > 0)[0]
            pick = int(remaining[0]) if len(remaining) else first
        else:
            pick = rng.choice_index(d2)
        centroids.append(points[pick])
    return np.array(centroids)


# --------------------------------------------------------------- silhouette

def silhouette_mean(points: np.ndarray, assignments: np.ndarray) -> float:
    """Mean silhouette with the usual conventions (singletons score 0)."""
    points = np.asarray(points, dtype=float)
    assign = np.asarray(assignments, dtype=int)
    m = points.shape[0]
    labels = np.unique(assign)
    if len(labels) < 2:
        raise ContractError("silhouette needs at least two clusters")
    dists = np.sqrt(_sq_dists(points, points))
    scores = np.zeros(m)
    for i in range(m):
        own = assign == assign[i]
        n_own = int(own.sum())
        if n_own <= 1:
            scores[i] = 0.0
            continue
        a = dists[i, own].sum() / (n_own - 1)
        b = min(dists[i, assign == c].mean() for c in labels if c != assign[i])
        scores[i] = 0.0 if max(a, b) == 0.0 else (b - a) / max(a, b)
    return float(scores.mean())


def choose_k(points: np.ndarray, k_lo: int, k_hi: int, seed: int) -> int:
    """Argmax of the mean silhouette over [k_lo, k_hi]; ties pick smaller k."""
    if k_lo < 2 or k_hi < k_lo:
        raise ContractError(f"need 2 <= k_lo <= k_hi, got [{k_lo}, {k_hi}]")
    best_k, best_s = None, -np.inf
    for k in range(k_lo, k_hi + 1):
        result = kmeans(points, k, derive_seed(seed, f"kmeans:{k}"))
        s = silhouette_mean(points, result.assignments)
        if s > best_s:
            best_k, best_s = k, s
    return int(best_k)


# ---------------------------------------------------------------- selection

def init_select(points: np.ndarray, clusters: ClusterResult) -> list[int]:
    """Nearest pool point to each centroid; distance ties pick the lowest index."""
    chosen = []
    for c in range(clusters.centroids.shape[0]):
        d2 = np.sum((points - clusters.centroids[c]) ** 2, axis=1)
        chosen.append(int(np.argmin(d2)))     # argmin breaks ties at lowest index
    return sorted(set(chosen))


@dataclass
class SelectionState:
    labeled: list[int]
    labels: dict[int, float] = field(default_factory=dict)
    model: object = None


def igs_score(state: SelectionState, pool: np.ndarray) -> np.ndarray:
    """Scores for every pool point; labeled entries get 0 (never re-picked)."""
    pool = np.asarray(pool, dtype=float)
    if not state.labeled:
        raise ContractError("scoring needs at least one labeled point")
    if state.model is None:
        raise ContractError("scoring needs a fitted model for d_y")
    labeled_idx = np.asarray(state.labeled, dtype=int)
    labeled_x = pool[labeled_idx]
    labeled_y = np.array([state.labels[i] for i in state.labeled])

    dists_all = np.sqrt(_sq_dists(pool, pool))
    r = dists_all.sum(axis=1)                          # over the whole pool
    d_x = np.sqrt(_sq_dists(pool, labeled_x)).min(axis=1)
    preds = np.asarray(state.model.predict(pool), dtype=float)
    d_y = np.abs(preds[:, None] - labeled_y[None, :]).min(axis=1)

    scores = np.zeros(pool.shape[0])
    mask = r > 0.0
    scores[mask] = d_x[mask] * d_y[mask] / r[mask]
    scores[labeled_idx] = 0.0
    return scores


def _score_components(state: SelectionState, pool: np.ndarray, index: int) -> tuple[float, float, float]:
    labeled_idx = np.asarray(state.labeled, dtype=int)
    x = pool[index]
    d_x = float(np.sqrt(np.sum((pool[labeled_idx] - x) ** 2, axis=1)).min())
    pred = float(np.asarray(state.model.predict(pool[index:index + 1]))[0])
    d_y = float(min(abs(pred - state.labels[i]) for i in state.labeled))
    r = float(np.sqrt(np.sum((pool - x) ** 2, axis=1)).sum())
    return d_x, d_y, r


def run_active_selection(
    pool: TabularDataset,
    oracle: Callable[[int], float],
    budget: LabelBudget,
    seed: int,
    regressor_spec: RegressorSpec | None = None,
) -> tuple[TabularDataset, list[AcquisitionRecord]]:
    """Label `budget.total` pool points: clustering start, then greedy scores.

    `oracle(i)` reveals the label of pool row i and is only called for
    acquired points. Returns the labeled training set (rows in acquisition
    order) and the per-acquisition log.
    """
    points = pool.features
    m = points.shape[0]
    if budget.total > m:
        raise BudgetError(f"budget {budget.total} exceeds pool size {m}")
    spec = regressor_spec or RegressorSpec(kind="kernel-ridge")
    if budget.initial is None:
        k_hi = min(10, m // 2)
        if k_hi < 2:
            raise BudgetError(f"pool of {m} is too small to choose an initial count")
        m0 = choose_k(points, 2, k_hi, derive_seed(seed, "choose-k"))
    else:
        m0 = budget.initial
    m0 = min(m0, budget.total)

    clusters = kmeans(points, m0, derive_seed(seed, "kmeans"))
    labeled = init_select(points, clusters)
    state = SelectionState(labeled=list(labeled))
    for i in state.labeled:
        state.labels[i] = float(oracle(i))

    records: list[AcquisitionRecord] = []
    step = len(state.labeled)
    while len(state.labeled) < budget.total:
        state.model = _fit_selection_model(spec, points, state)
        scores = igs_score(state, points)
        unlabeled = np.setdiff1d(np.arange(m), np.asarray(state.labeled, dtype=int))
        best = int(unlabeled[np.argmax(scores[unlabeled])])   # ties: lowest index
        d_x, d_y, r = _score_components(state, points, best)
        step += 1
        records.append(AcquisitionRecord(step, best, d_x, d_y, r, float(scores[best])))
        state.labeled.append(best)
        state.labels[best] = float(oracle(best))

    idx = np.asarray(state.labeled, dtype=int)
    selected = TabularDataset(points[idx],
                              np.array([state.labels[i] for i in state.labeled]),
                              pool.columns, pool.label_name, "real")
    return selected, records


def _fit_selection_model(spec: RegressorSpec, points: np.ndarray, state: SelectionState):
    x = points[np.asarray(state.labeled, dtype=int)]
    y = np.array([state.labels[i] for i in state.labeled])
    model = KernelRidgeRegressor(spec) if spec.kind == "kernel-ridge" else None
    if model is None:
        from .regress import MlpRegressor
        model = MlpRegressor(spec)
    return model.fit(x, y)
