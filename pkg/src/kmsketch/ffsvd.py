"""Randomized rank-k approximation of the right singular subspace."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_count, check_eps, check_matrix
from .linalg import range_basis, top_right_singular_vectors
from .rng import as_generator

__all__ = ["FfsvdResult", "fast_frobenius_svd", "oversampled_width"]


@dataclass(frozen=True)
class FfsvdResult:
    Z: np.ndarray
    r_internal: int
    residual_sq: float


def oversampled_width(k: int, eps: float) -> int:
    """Number of Gaussian test vectors, ``k + ceil(k/eps + 1)``."""
    return k + math.ceil(k / eps + 1)


def fast_frobenius_svd(A, k: int, eps: float, rng) -> FfsvdResult:
    """Gaussian range finder returning a d x k orthonormal ``Z`` close to ``V_k``.

    ``Y = A R`` for a d x r Gaussian ``R``, ``Q`` an orthonormal basis of
    ``range(Y)``, and ``Z`` the top ``k`` right singular vectors of ``Q^T A``.
    In expectation ``||A - A Z Z^T||_F^2 <= (1 + eps) ||A - A_k||_F^2``.

    When ``Y`` has rank below ``r`` (e.g. ``n < r`` or low-rank ``A``) the
    basis spans the numerical range only; if that leaves fewer than ``k``
    directions, ``Z`` is completed with an orthonormal basis of the
    complement so callers always get ``k`` columns.
    """
    A = check_matrix(A, "A")
    n, d = A.shape
    k = check_count(k, "k", 1, min(n, d))
    eps = check_eps(eps)
    r = oversampled_width(k, eps)

    R = as_generator(rng).standard_normal((d, r))
    Y = A @ R
    Q = range_basis(Y) if np.any(Y) else np.zeros((n, 0))
    if Q.shape[1] == 0:
        # A == 0: every subspace is optimal
        Z = np.eye(d, k)
    else:
        Z = top_right_singular_vectors(Q.T @ A, k)
    E = A - (A @ Z) @ Z.T
    return FfsvdResult(Z=Z, r_internal=r, residual_sq=float(np.sum(E * E)))
