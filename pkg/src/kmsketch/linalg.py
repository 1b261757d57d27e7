"""Dense linear-algebra kernels: norms, SVD, truncation, QR, pseudoinverse.

Everything is a pure function of its inputs. The heavy lifting is LAPACK via
numpy; this module fixes the conventions (rank cutoff, sign-free contracts,
error reporting) that the randomized routines rely on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import NumericalError, check_count, check_matrix

DEFAULT_RANK_CUTOFF = 1e-12

__all__ = [
    "SvdFactors",
    "frobenius_norm",
    "svd",
    "best_rank_k",
    "orthonormalize_columns",
    "pseudoinverse",
    "spectral_norm",
]


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``M = U @ diag(sigma) @ V.T`` restricted to the numerical rank.

    ``U`` is m x rank and ``V`` is n x rank, both with orthonormal columns;
    ``sigma`` is sorted nonincreasing.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.sigma.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


def frobenius_norm(M) -> float:
    M = check_matrix(M)
    return float(np.sqrt(np.sum(M * M)))


def _lapack_svd(M, full_matrices=False):
    try:
        return np.linalg.svd(M, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD did not converge for a {M.shape[0]}x{M.shape[1]} matrix"
        ) from exc


def svd(M, rank_cutoff: float = DEFAULT_RANK_CUTOFF) -> SvdFactors:
    """Thin SVD keeping singular values strictly above ``rank_cutoff * sigma_max``.

    A zero matrix yields rank 0 (empty factors).
    """
    M = check_matrix(M)
    if rank_cutoff < 0:
        raise ValueError(f"rank_cutoff must be nonnegative, got {rank_cutoff}")
    U, s, Vt = _lapack_svd(M)
    if s.size == 0 or s[0] == 0.0:
        keep = 0
    else:
        keep = int(np.count_nonzero(s > rank_cutoff * s[0]))
    return SvdFactors(U=U[:, :keep], sigma=s[:keep].copy(), V=Vt[:keep].T.copy())


def top_right_singular_vectors(M, k: int) -> np.ndarray:
    """The leading ``k`` right singular vectors of ``M`` as a d x k matrix.

    Unlike :func:`svd`, no rank cutoff is applied; when ``rank(M) < k`` the
    trailing columns are an arbitrary orthonormal completion.
    """
    M = check_matrix(M)
    d = M.shape[1]
    k = check_count(k, "k", 1, d)
    _, _, Vt = _lapack_svd(M, full_matrices=True)
    return Vt[:k].T.copy()


def best_rank_k(M, k: int) -> np.ndarray:
    """Eckart-Young truncation ``A_k = A V_k V_k^T``."""
    M = check_matrix(M)
    k = check_count(k, "k", 1, min(M.shape))
    U, s, Vt = _lapack_svd(M)
    return (U[:, :k] * s[:k]) @ Vt[:k]


def orthonormalize_columns(M, rank_cutoff: float = DEFAULT_RANK_CUTOFF) -> np.ndarray:
    """Householder QR; returns Q with ``Q.T @ Q = I`` and ``range(Q) = range(M)``.

    Raises NumericalError naming the first column that is (numerically) a
    combination of the preceding ones.
    """
    M = check_matrix(M)
    m, n = M.shape
    if n > m:
        raise NumericalError(
            f"cannot orthonormalize {n} columns in dimension {m}: column {m} is dependent"
        )
    Q, R = np.linalg.qr(M, mode="reduced")
    diag = np.abs(np.diag(R))
    scale = max(np.max(np.linalg.norm(M, axis=0)), np.finfo(float).tiny)
    bad = np.flatnonzero(diag <= max(rank_cutoff, np.finfo(float).eps * max(m, n)) * scale)
    if bad.size:
        raise NumericalError(f"rank-deficient input: column {int(bad[0])} is linearly dependent")
    return Q


def range_basis(M, rank_cutoff: float = DEFAULT_RANK_CUTOFF) -> np.ndarray:
    """Orthonormal basis of ``range(M)`` that tolerates rank deficiency."""
    return svd(M, rank_cutoff=rank_cutoff).U


def pseudoinverse(M, rank_cutoff: float = DEFAULT_RANK_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudoinverse through the thin SVD."""
    M = check_matrix(M)
    f = svd(M, rank_cutoff=rank_cutoff)
    return (f.V / f.sigma) @ f.U.T


def spectral_norm(M) -> float:
    M = check_matrix(M)
    s = _lapack_svd(M)[1]
    return float(s[0]) if s.size else 0.0
