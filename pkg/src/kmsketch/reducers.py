"""Dimensionality reduction for k-means: A (n x d) -> A_tilde (n x r).

Two feature-selection methods keep rescaled columns of ``A``:

* ``leverage_select``: sample features by normalized leverage scores of the
  exact top-k right singular vectors.
* ``sampling_select``: same idea, with the singular vectors replaced by the
  randomized approximation from :func:`fast_frobenius_svd`.

Two feature-extraction methods build artificial features:

* ``random_projection``: multiply by a random sign (or sparse Achlioptas)
  matrix, optionally through the mailman algorithm.
* ``approx_svd``: project onto the approximate top-k right singular space.

``gaussian_jl`` is a dense Gaussian Johnson-Lindenstrauss baseline.
Each method has a functional form returning :class:`SketchOutput` and a
scikit-learn transformer wrapping it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from ._validation import check_count, check_eps, check_matrix
from .ffsvd import fast_frobenius_svd
from .linalg import svd
from .mailman import mailman_matmul
from .rng import (
    SamplingOperator,
    achlioptas_matrix,
    as_generator,
    gaussian_matrix,
    randomized_sampling,
    sample_columns,
    sign_matrix,
)

__all__ = [
    "METHODS",
    "SELECTION_METHODS",
    "EXTRACTION_METHODS",
    "SketchOutput",
    "leverage_scores",
    "leverage_sample_size",
    "sampling_sample_size",
    "projection_dimension",
    "reduce_leverage_select",
    "reduce_sampling_select",
    "reduce_random_projection",
    "reduce_approx_svd",
    "reduce_gaussian_jl",
    "reduce",
    "LeverageScoreSelector",
    "RandomizedSamplingSelector",
    "RandomSignProjection",
    "ApproxSVDProjection",
    "GaussianJLProjection",
]

SELECTION_METHODS = ("leverage_select", "sampling_select")
EXTRACTION_METHODS = ("random_projection", "approx_svd")
METHODS = SELECTION_METHODS + EXTRACTION_METHODS + ("gaussian_jl", "none")


@dataclass(frozen=True)
class SketchOutput:
    """Reduced matrix plus the operator that produced it.

    ``operator`` is a :class:`SamplingOperator` for the selection methods and
    a dense d x r matrix otherwise (``None`` for the identity).
    """

    a_tilde: np.ndarray
    method: str
    r: int
    operator: SamplingOperator | np.ndarray | None = field(repr=False)
    params: dict = field(default_factory=dict)

    @property
    def is_selection(self) -> bool:
        return isinstance(self.operator, SamplingOperator)

    def apply(self, X) -> np.ndarray:
        """Apply the same reduction to other rows with the same features."""
        X = np.asarray(X, dtype=np.float64)
        if self.operator is None:
            return X.copy()
        if self.is_selection:
            return self.operator.apply(X)
        return X @ self.operator

    def selected(self) -> tuple[np.ndarray, np.ndarray]:
        """(feature index, scale) per output column, selection methods only."""
        if not self.is_selection:
            raise TypeError(f"{self.method} does not select features")
        return self.operator.omega.copy(), self.operator.s_diag.copy()


def leverage_scores(A, k: int) -> np.ndarray:
    """Normalized right leverage scores ``||(V_k)_(i)||^2 / k``; they sum to one."""
    A = check_matrix(A, "A")
    k = check_count(k, "k", 1)
    f = svd(A)
    if f.rank < k:
        raise ValueError(f"k={k} exceeds rank(A)={f.rank}")
    Vk = f.V[:, :k]
    return np.einsum("ij,ij->i", Vk, Vk) / k


def leverage_sample_size(k: int, eps: float, c: float = 1.0) -> int:
    """``ceil(c k ln(k/eps) / eps^2)``; the order the leverage-score method needs."""
    return max(1, math.ceil(c * k * math.log(k / eps) / eps**2))


def sampling_sample_size(k: int, eps: float, c1: float = 1.0) -> int:
    """``ceil(c1 * 4k ln(200k) / eps^2)``."""
    return max(1, math.ceil(c1 * 4 * k * math.log(200 * k) / eps**2))


def projection_dimension(k: int, eps: float, c2: float = 1.0) -> int:
    """``ceil(c2 k / eps^2)``."""
    return max(1, math.ceil(c2 * k / eps**2))


def _check_reduces(r, d, method):
    if r >= d:
        raise ValueError(f"{method}: r={r} must be smaller than d={d} to reduce dimension")


def reduce_leverage_select(A, k: int, eps: float, r: int | None = None, rng=None) -> SketchOutput:
    """Keep ``r`` features drawn i.i.d. by leverage score, feature i scaled by
    ``1/sqrt(r * score_i)``. ``r`` defaults to :func:`leverage_sample_size`."""
    A = check_matrix(A, "A")
    eps = check_eps(eps)
    k = check_count(k, "k", 1, min(A.shape))
    r = leverage_sample_size(k, eps) if r is None else check_count(r, "r")
    scores = leverage_scores(A, k)
    op = sample_columns(scores, r, as_generator(rng))
    return SketchOutput(
        a_tilde=op.apply(A), method="leverage_select", r=r, operator=op,
        params={"k": k, "eps": eps, "r": r},
    )


def reduce_sampling_select(A, k: int, eps: float, rng=None, c1: float = 1.0) -> SketchOutput:
    """Sample ``r = ceil(c1 4k ln(200k)/eps^2)`` features by the row norms of
    the approximate singular vectors ``Z``."""
    A = check_matrix(A, "A")
    eps = check_eps(eps, high=1 / 3)
    if c1 <= 0:
        raise ValueError(f"c1 must be positive, got {c1}")
    k = check_count(k, "k", 1, min(A.shape))
    r = sampling_sample_size(k, eps, c1)
    _check_reduces(r, A.shape[1], "sampling_select")
    gen = as_generator(rng)
    Z = fast_frobenius_svd(A, k, eps, gen).Z
    op = randomized_sampling(Z, r, gen)
    return SketchOutput(
        a_tilde=op.apply(A), method="sampling_select", r=r, operator=op,
        params={"k": k, "eps": eps, "c1": c1, "r": r},
    )


def reduce_random_projection(
    A, k: int, eps: float, rng=None, c2: float = 1.0,
    variant: str = "dense_sign", use_mailman: bool = False,
) -> SketchOutput:
    """``A @ Pi`` for a d x r random sign matrix, ``r = ceil(c2 k / eps^2)``.

    ``variant="achlioptas"`` uses the sparse three-valued matrix instead.
    With ``use_mailman`` the product is formed as ``(Pi^T A^T)^T`` by
    mailman multiplication over Pi's two- or three-symbol alphabet.
    """
    A = check_matrix(A, "A")
    eps = check_eps(eps, high=1 / 3)
    if c2 <= 0:
        raise ValueError(f"c2 must be positive, got {c2}")
    k = check_count(k, "k", 1)
    d = A.shape[1]
    r = projection_dimension(k, eps, c2)
    _check_reduces(r, d, "random_projection")
    gen = as_generator(rng)
    if variant in ("dense_sign", "dense"):
        variant = "dense_sign"
        Pi = sign_matrix(gen, d, r)
    elif variant == "achlioptas":
        Pi = achlioptas_matrix(gen, d, r)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if use_mailman:
        a_tilde = mailman_matmul(Pi.T, A.T).T
    else:
        a_tilde = A @ Pi
    return SketchOutput(
        a_tilde=np.ascontiguousarray(a_tilde), method="random_projection", r=r, operator=Pi,
        params={"k": k, "eps": eps, "c2": c2, "r": r, "variant": variant,
                "use_mailman": bool(use_mailman)},
    )


def reduce_approx_svd(A, k: int, eps: float, rng=None) -> SketchOutput:
    """``A @ Z`` with ``Z`` the approximate top-k right singular vectors (r = k)."""
    A = check_matrix(A, "A")
    eps = check_eps(eps)
    k = check_count(k, "k", 1, min(A.shape))
    Z = fast_frobenius_svd(A, k, eps, as_generator(rng)).Z
    return SketchOutput(
        a_tilde=A @ Z, method="approx_svd", r=k, operator=Z, params={"k": k, "eps": eps, "r": k}
    )


def reduce_gaussian_jl(A, r: int, rng=None) -> SketchOutput:
    """``A @ G / sqrt(r)`` for a d x r standard Gaussian ``G``."""
    A = check_matrix(A, "A")
    r = check_count(r, "r")
    _check_reduces(r, A.shape[1], "gaussian_jl")
    G = gaussian_matrix(as_generator(rng), A.shape[1], r) / np.sqrt(r)
    return SketchOutput(a_tilde=A @ G, method="gaussian_jl", r=r, operator=G, params={"r": r})


def reduce(A, method: str, k: int, eps: float, rng=None, r=None, c1=1.0, c2=1.0,
           variant="dense_sign", use_mailman=False) -> SketchOutput:
    """Dispatch to one reducer by name (see :data:`METHODS`)."""
    gen = as_generator(rng)
    if method == "leverage_select":
        return reduce_leverage_select(A, k, eps, r=r, rng=gen)
    if method == "sampling_select":
        return reduce_sampling_select(A, k, eps, rng=gen, c1=c1)
    if method == "random_projection":
        return reduce_random_projection(A, k, eps, rng=gen, c2=c2, variant=variant,
                                        use_mailman=use_mailman)
    if method == "approx_svd":
        return reduce_approx_svd(A, k, eps, rng=gen)
    if method == "gaussian_jl":
        A = check_matrix(A, "A")
        if r is None:
            r = math.ceil(8 * math.log(A.shape[0]) / eps**2)
        return reduce_gaussian_jl(A, r, rng=gen)
    if method == "none":
        A = check_matrix(A, "A", copy=True)
        return SketchOutput(a_tilde=A, method="none", r=A.shape[1], operator=None, params={})
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


class _SketchTransformer(TransformerMixin, BaseEstimator):
    """fit learns the d x r operator from training data; transform applies it."""

    def _sketch(self, X):
        raise NotImplementedError

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=np.float64)
        self.sketch_ = self._sketch(X)
        self.n_components_ = self.sketch_.r
        return self

    def fit_transform(self, X, y=None, **fit_params):
        self.fit(X)
        return self.sketch_.a_tilde.copy()

    def transform(self, X):
        check_is_fitted(self, "sketch_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return self.sketch_.apply(X)


class LeverageScoreSelector(_SketchTransformer):
    """Feature selection by leverage-score sampling.

    Parameters
    ----------
    n_clusters : int
        Target number of clusters (rank of the singular subspace).
    eps : float in (0, 1)
    n_components : int or None
        Number of sampled features; defaults to ``leverage_sample_size``.
    random_state : int, RngStream, Generator or None
    """

    def __init__(self, n_clusters=2, eps=0.3, n_components=None, random_state=None):
        self.n_clusters = n_clusters
        self.eps = eps
        self.n_components = n_components
        self.random_state = random_state

    def _sketch(self, X):
        return reduce_leverage_select(X, self.n_clusters, self.eps, r=self.n_components,
                                      rng=self.random_state)

    def get_support(self):
        check_is_fitted(self, "sketch_")
        return self.sketch_.selected()[0]


class RandomizedSamplingSelector(_SketchTransformer):
    """Feature selection by row-norm sampling of approximate singular vectors."""

    def __init__(self, n_clusters=2, eps=0.3, c1=1.0, random_state=None):
        self.n_clusters = n_clusters
        self.eps = eps
        self.c1 = c1
        self.random_state = random_state

    def _sketch(self, X):
        return reduce_sampling_select(X, self.n_clusters, self.eps, rng=self.random_state,
                                      c1=self.c1)

    def get_support(self):
        check_is_fitted(self, "sketch_")
        return self.sketch_.selected()[0]


class RandomSignProjection(_SketchTransformer):
    """Feature extraction by a random sign or Achlioptas projection."""

    def __init__(self, n_clusters=2, eps=0.3, c2=1.0, variant="dense_sign",
                 use_mailman=False, random_state=None):
        self.n_clusters = n_clusters
        self.eps = eps
        self.c2 = c2
        self.variant = variant
        self.use_mailman = use_mailman
        self.random_state = random_state

    def _sketch(self, X):
        return reduce_random_projection(X, self.n_clusters, self.eps, rng=self.random_state,
                                        c2=self.c2, variant=self.variant,
                                        use_mailman=self.use_mailman)


class ApproxSVDProjection(_SketchTransformer):
    """Feature extraction onto ``n_clusters`` approximate singular directions."""

    def __init__(self, n_clusters=2, eps=0.3, random_state=None):
        self.n_clusters = n_clusters
        self.eps = eps
        self.random_state = random_state

    def _sketch(self, X):
        return reduce_approx_svd(X, self.n_clusters, self.eps, rng=self.random_state)


class GaussianJLProjection(_SketchTransformer):
    """Dense Gaussian projection to ``n_components`` dimensions."""

    def __init__(self, n_components=2, random_state=None):
        self.n_components = n_components
        self.random_state = random_state

    def _sketch(self, X):
        return reduce_gaussian_jl(X, self.n_components, rng=self.random_state)
