"""k-means: indicator matrices, the objective, Lloyd iterations and exact oracles."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from ._validation import check_count, check_matrix
from .rng import as_generator

__all__ = [
    "ClusterIndicator",
    "KmeansSolution",
    "indicator_from_assignment",
    "cost",
    "cost_residual",
    "lloyd",
    "kmeanspp_init",
    "gamma_approx_kmeans",
    "brute_force_optimum",
    "MAX_ENUMERATION_N",
    "LloydKMeans",
]

MAX_ENUMERATION_N = 14


@dataclass(frozen=True)
class ClusterIndicator:
    """A partition of ``n`` points into ``k`` nonempty clusters.

    The n x k indicator ``X`` has ``X[i, j] = 1/sqrt(s_j)`` when point ``i``
    is in cluster ``j`` and zero otherwise, so ``X.T @ X = I_k`` and
    ``X @ X.T @ A`` replaces every row of ``A`` by its cluster centroid.
    """

    assign: np.ndarray
    k: int
    sizes: np.ndarray

    @property
    def n(self) -> int:
        return int(self.assign.shape[0])

    def matrix(self) -> np.ndarray:
        X = np.zeros((self.n, self.k))
        X[np.arange(self.n), self.assign] = 1.0 / np.sqrt(self.sizes[self.assign])
        return X

    def projector(self) -> np.ndarray:
        """``X X^T``: entry ``1/s_l`` for co-clustered pairs, zero otherwise."""
        same = self.assign[:, None] == self.assign[None, :]
        return np.where(same, 1.0 / self.sizes[self.assign][:, None], 0.0)

    def centroids(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=np.float64)
        C = np.zeros((self.k, A.shape[1]))
        np.add.at(C, self.assign, A)
        return C / self.sizes[:, None]


@dataclass(frozen=True)
class KmeansSolution:
    indicator: ClusterIndicator
    centroids: np.ndarray
    cost: float
    iterations: int
    history: tuple = ()

    @property
    def labels(self) -> np.ndarray:
        return self.indicator.assign


def indicator_from_assignment(assign, k: int) -> ClusterIndicator:
    """Validate 0-based labels and build the indicator; every cluster must be nonempty."""
    assign = np.asarray(assign)
    if assign.ndim != 1 or assign.size == 0:
        raise ValueError("assignment must be a nonempty 1-D label vector")
    if not np.issubdtype(assign.dtype, np.integer):
        if not np.all(assign == np.round(assign)):
            raise ValueError("labels must be integers")
    assign = assign.astype(np.int64)
    k = check_count(k, "k")
    if assign.min() < 0 or assign.max() >= k:
        raise ValueError(f"labels must lie in [0, {k - 1}]")
    sizes = np.bincount(assign, minlength=k)
    empty = np.flatnonzero(sizes == 0)
    if empty.size:
        raise ValueError(f"cluster {int(empty[0])} is empty")
    return ClusterIndicator(assign=assign, k=k, sizes=sizes)


def _as_indicator(X, k=None) -> ClusterIndicator:
    if isinstance(X, ClusterIndicator):
        return X
    if isinstance(X, KmeansSolution):
        return X.indicator
    labels = np.asarray(X)
    return indicator_from_assignment(labels, int(labels.max()) + 1 if k is None else k)


def cost(A, X, check: bool = False) -> float:
    """k-means objective: sum of squared distances from points to their centroids.

    ``X`` is a ClusterIndicator (or a label vector). With ``check=True`` the
    matrix form ``||A - X X^T A||_F^2`` is also evaluated and the two must
    agree to 1e-8 relative.
    """
    A = check_matrix(A, "A")
    ind = _as_indicator(X)
    if ind.n != A.shape[0]:
        raise ValueError(f"indicator has {ind.n} points, A has {A.shape[0]} rows")
    diff = A - ind.centroids(A)[ind.assign]
    value = float(np.sum(diff * diff))
    if check:
        other = cost_residual(A, ind)
        scale = max(value, other, np.finfo(float).tiny)
        tol = 1e-8 * max(scale, float(np.sum(A * A)) * 1e-8)
        if abs(value - other) > tol:
            raise AssertionError(f"centroid cost {value!r} != residual cost {other!r}")
    return value


def cost_residual(A, X) -> float:
    """``||A - X X^T A||_F^2`` computed with the dense indicator matrix."""
    A = np.asarray(A, dtype=np.float64)
    Xm = _as_indicator(X).matrix()
    R = A - Xm @ (Xm.T @ A)
    return float(np.sum(R * R))


def _sq_dists(A, C):
    return np.sum((A[:, None, :] - C[None, :, :]) ** 2, axis=2)


def lloyd(A, k: int, init, max_iter: int = 300, tol: float = 1e-9) -> KmeansSolution:
    """Alternate nearest-centroid assignment and centroid update.

    Ties go to the lowest cluster index. An emptied cluster takes the point
    farthest from its current centroid. Stops when the assignment repeats,
    the relative cost decrease falls below ``tol``, or after ``max_iter``
    sweeps.
    """
    A = check_matrix(A, "A")
    n = A.shape[0]
    k = check_count(k, "k", 1)
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points n={n}")
    C = check_matrix(init, "init", copy=True)
    if C.shape != (k, A.shape[1]):
        raise ValueError(f"init must have shape ({k}, {A.shape[1]}), got {C.shape}")
    max_iter = check_count(max_iter, "max_iter")

    assign = None
    history = []
    iterations = 0
    for _ in range(max_iter):
        new = np.argmin(_sq_dists(A, C), axis=1)
        new = _repair_empty(A, new, k, C)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        iterations += 1
        ind = indicator_from_assignment(assign, k)
        C = ind.centroids(A)
        history.append(cost(A, ind))
        if len(history) > 1 and history[-2] - history[-1] <= tol * history[-2]:
            break
    ind = indicator_from_assignment(assign, k)
    return KmeansSolution(
        indicator=ind, centroids=ind.centroids(A), cost=history[-1],
        iterations=iterations, history=tuple(history),
    )


def _repair_empty(A, assign, k, C):
    sizes = np.bincount(assign, minlength=k)
    if np.all(sizes > 0):
        return assign
    assign = assign.copy()
    d = np.sum((A - C[assign]) ** 2, axis=1)
    for j in np.flatnonzero(sizes == 0):
        donors = sizes[assign] > 1
        cand = np.where(donors, d, -np.inf)
        i = int(np.argmax(cand))
        sizes[assign[i]] -= 1
        assign[i] = j
        sizes[j] = 1
        d[i] = -np.inf
    return assign


def kmeanspp_init(A, k: int, rng) -> np.ndarray:
    """D^2-weighted seeding: each new center is a data point drawn with
    probability proportional to its squared distance to the nearest chosen one."""
    A = np.asarray(A, dtype=np.float64)
    gen = as_generator(rng)
    n = A.shape[0]
    idx = [int(gen.integers(n))]
    d2 = np.sum((A - A[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # fewer distinct points than k: pick any unused point
            rest = np.setdiff1d(np.arange(n), idx)
            nxt = int(rest[gen.integers(rest.size)])
        else:
            nxt = int(np.searchsorted(np.cumsum(d2), gen.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        idx.append(nxt)
        d2 = np.minimum(d2, np.sum((A - A[nxt]) ** 2, axis=1))
    return A[idx].copy()


def gamma_approx_kmeans(
    A, k: int, restarts: int = 10, rng=None, max_iter: int = 300, tol: float = 1e-9
) -> KmeansSolution:
    """Best of ``restarts`` Lloyd runs, each seeded with k-means++."""
    A = check_matrix(A, "A")
    restarts = check_count(restarts, "restarts")
    k = check_count(k, "k", 1)
    if k > A.shape[0]:
        raise ValueError(f"k={k} exceeds the number of points n={A.shape[0]}")
    gen = as_generator(rng)
    best = None
    for _ in range(restarts):
        sol = lloyd(A, k, kmeanspp_init(A, k, gen), max_iter=max_iter, tol=tol)
        if best is None or sol.cost < best.cost:
            best = sol
    return best


@lru_cache(maxsize=32)
def _partitions(n: int, k: int) -> np.ndarray:
    """All restricted-growth strings of length n with exactly k blocks, in
    lexicographic order (rows of an int8 array)."""
    rows = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for pos in range(1, n):
        remaining = n - pos - 1
        parts, new_max = [], []
        for lab in range(k):
            ok = lab <= maxes + 1
            m = np.maximum(maxes, lab)
            # enough positions left to open the missing blocks
            ok &= (k - 1 - m) <= remaining
            if np.any(ok):
                sel = rows[ok]
                parts.append(np.hstack([sel, np.full((sel.shape[0], 1), lab, dtype=np.int8)]))
                new_max.append(m[ok])
        rows = np.vstack(parts)
        maxes = np.concatenate(new_max)
        order = np.lexsort(rows.T[::-1])
        rows, maxes = rows[order], maxes[order]
    rows = rows[maxes == k - 1]
    rows.setflags(write=False)
    return rows


def brute_force_optimum(A, k: int, chunk: int = 50_000) -> KmeansSolution:
    """Exact optimum by enumerating every partition into ``k`` nonempty blocks.

    Feasible for ``n <= 14``. Ties go to the first partition in
    restricted-growth (lexicographic) order.
    """
    A = check_matrix(A, "A")
    n = A.shape[0]
    k = check_count(k, "k", 1)
    if n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration oracle supports n <= {MAX_ENUMERATION_N}, got n={n}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points n={n}")
    P = _partitions(n, k)
    Ac = A - A.mean(axis=0)
    total = float(np.sum(Ac * Ac))
    best_val, best_row = np.inf, None
    for start in range(0, P.shape[0], chunk):
        block = P[start:start + chunk]
        onehot = (block[:, :, None] == np.arange(k)[None, None, :]).astype(np.float64)
        sizes = onehot.sum(axis=1)
        sums = np.einsum("pnk,nd->pkd", onehot, Ac)
        vals = total - np.sum(np.sum(sums * sums, axis=2) / sizes, axis=1)
        j = int(np.argmin(vals))
        # strict improvement keeps the first minimizer across chunks
        if vals[j] < best_val:
            best_val, best_row = vals[j], block[j]
    ind = indicator_from_assignment(best_row.astype(np.int64), k)
    return KmeansSolution(
        indicator=ind, centroids=ind.centroids(A), cost=cost(A, ind), iterations=0
    )


class LloydKMeans(ClusterMixin, TransformerMixin, BaseEstimator):
    """Restarted Lloyd k-means with k-means++ seeding.

    Parameters
    ----------
    n_clusters : int
    n_init : int
        Number of seeded restarts; the lowest-cost run is kept.
    max_iter, tol : Lloyd stopping rules.
    random_state : int, RngStream, Generator or None
    """

    def __init__(self, n_clusters=8, n_init=10, max_iter=300, tol=1e-9, random_state=None):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=np.float64)
        sol = gamma_approx_kmeans(
            X, self.n_clusters, restarts=self.n_init, rng=self.random_state,
            max_iter=self.max_iter, tol=self.tol,
        )
        self.solution_ = sol
        self.labels_ = sol.labels
        self.cluster_centers_ = sol.centroids
        self.inertia_ = sol.cost
        self.n_iter_ = sol.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return np.argmin(_sq_dists(X, self.cluster_centers_), axis=1)

    def transform(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return np.sqrt(_sq_dists(X, self.cluster_centers_))
