"""Mailman multiplication for matrices over a finite alphabet.

An m x n matrix ``A`` whose entries come from an alphabet of size S is
factored as ``A = U P`` where ``U`` (m x S^m) lists every possible column
and ``P`` maps each column of ``A`` to its copy in ``U``. ``A x`` is then
``U (P x)``: bucket the entries of ``x`` by column pattern, then apply ``U``
recursively in O(S^m) operations.

Column order of ``U`` follows the recursive construction literally: the top
row of each level runs through the alphabet in order (``sigma_1 1^T | ... |
sigma_S 1^T``) and the one-row base case runs through it in reverse, which
for the binary alphabet {0, 1} is ``U_1 = (1 0)``. Hence for {0, 1}::

    U (m=2) = [[0, 0, 1, 1],
               [1, 0, 1, 0]]
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_matrix

__all__ = [
    "OpCounter",
    "MailmanPlan",
    "universal_column",
    "universal_matrix",
    "build_plan",
    "apply_plan",
    "mailman_matmul",
    "naive_op_count",
]

MAX_WIDTH = 1 << 22


@dataclass
class OpCounter:
    """Scalar operation tally for one input vector.

    ``universal`` counts additions and multiplications spent applying ``U``;
    ``bucket`` counts the additions spent forming ``P x``.
    """

    universal: int = 0
    bucket: int = 0

    @property
    def total(self) -> int:
        return self.universal + self.bucket


def _check_alphabet(alphabet) -> np.ndarray:
    alpha = np.asarray(alphabet, dtype=np.float64).ravel()
    if alpha.size < 2:
        raise ValueError("alphabet needs at least two distinct symbols")
    if np.unique(alpha).size != alpha.size:
        raise ValueError("alphabet symbols must be distinct")
    if not np.all(np.isfinite(alpha)):
        raise ValueError("alphabet symbols must be finite")
    return alpha


def _row_symbols(alpha: np.ndarray, m: int, row: int) -> np.ndarray:
    """Digit value -> symbol lookup for ``row`` (0-based) of an m-row ``U``."""
    return alpha[::-1] if row == m - 1 else alpha


def universal_column(alphabet, m: int, i: int) -> np.ndarray:
    """Column ``i`` (1-based) of the universal matrix with ``m`` rows."""
    alpha = _check_alphabet(alphabet)
    S = alpha.size
    m = check_count(m, "m")
    i = check_count(i, "i", 1, S**m)
    c = i - 1
    digits = np.empty(m, dtype=np.int64)
    for row in range(m - 1, -1, -1):
        c, digits[row] = divmod(c, S)
    return np.array([_row_symbols(alpha, m, row)[digits[row]] for row in range(m)])


def universal_matrix(alphabet, m: int) -> np.ndarray:
    """All ``S^m`` columns, built by the block recursion."""
    alpha = _check_alphabet(alphabet)
    m = check_count(m, "m")
    S = alpha.size
    if S**m > MAX_WIDTH:
        raise ValueError(f"universal matrix with {S}^{m} columns is too wide")
    U = alpha[::-1].reshape(1, S)
    for _ in range(m - 1):
        w = U.shape[1]
        top = np.repeat(alpha, w).reshape(1, S * w)
        U = np.vstack([top, np.tile(U, (1, S))])
    return U


@dataclass(frozen=True)
class MailmanPlan:
    """``A = U[:, correspondence]`` for the universal matrix ``U`` of ``(alphabet, m)``.

    ``correspondence`` holds 0-based column indices into ``U``, one per
    column of ``A``; duplicate columns of ``A`` share an index.
    """

    alphabet: np.ndarray
    m: int
    n: int
    correspondence: np.ndarray = field(repr=False)

    @property
    def width(self) -> int:
        return int(self.alphabet.size) ** self.m

    def reconstruct(self) -> np.ndarray:
        return universal_matrix(self.alphabet, self.m)[:, self.correspondence]


def _digits(A: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    order = np.argsort(alpha)
    sorted_alpha = alpha[order]
    pos = np.searchsorted(sorted_alpha, A)
    pos = np.clip(pos, 0, alpha.size - 1)
    bad = sorted_alpha[pos] != A
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"entry A[{i},{j}]={A[i, j]!r} is not in the alphabet")
    return order[pos]


def build_plan(A, alphabet=None) -> MailmanPlan:
    """Read ``A`` once and record which universal column each column equals.

    ``alphabet`` defaults to the sorted distinct entries of ``A`` (padded
    with a dummy symbol when ``A`` is constant).
    """
    A = check_matrix(A, "A")
    alpha = _default_alphabet(A) if alphabet is None else _check_alphabet(alphabet)
    m, n = A.shape
    S = alpha.size
    if S**m > MAX_WIDTH:
        raise ValueError(
            f"{m} rows over a {S}-symbol alphabet gives {S}^{m} universal columns; "
            "use mailman_matmul, which splits rows into blocks"
        )
    tau = _digits(A, alpha)
    # last row is decoded against the reversed alphabet
    tau[-1] = S - 1 - tau[-1]
    weights = S ** np.arange(m - 1, -1, -1, dtype=np.int64)
    corr = weights @ tau
    return MailmanPlan(alphabet=alpha, m=m, n=n, correspondence=corr)


def _default_alphabet(A: np.ndarray) -> np.ndarray:
    alpha = np.unique(A)
    if alpha.size == 1:
        alpha = np.array([alpha[0], alpha[0] + 1.0])
    return alpha


def _apply_universal(alpha: np.ndarray, m: int, z: np.ndarray, counter: OpCounter | None):
    """``U z`` for z of shape (S^m, p) via the block recursion."""
    S = alpha.size
    out = np.empty((m, z.shape[1]))
    for row in range(m - 1):
        w = z.shape[0] // S
        blocks = z.reshape(S, w, -1)
        sums = blocks.sum(axis=1)
        out[row] = alpha @ sums
        z = blocks.sum(axis=0)
        if counter is not None:
            # S block sums, S scalings, S-1 combines, then the fold
            counter.universal += S * (w - 1) + S + (S - 1) + (S - 1) * w
    out[m - 1] = alpha[::-1] @ z
    if counter is not None:
        counter.universal += S + (S - 1)
    return out


def apply_plan(plan: MailmanPlan, x, counter: OpCounter | None = None) -> np.ndarray:
    """``A @ x`` from a plan; ``x`` may be a vector (n,) or a matrix (n, p).

    ``counter`` accumulates the per-vector operation count.
    """
    x = np.asarray(x, dtype=np.float64)
    vector = x.ndim == 1
    X = x.reshape(-1, 1) if vector else x
    if X.ndim != 2 or X.shape[0] != plan.n:
        raise ValueError(f"x has {X.shape[0]} rows, plan expects {plan.n}")
    z = np.zeros((plan.width, X.shape[1]))
    np.add.at(z, plan.correspondence, X)
    if counter is not None:
        counter.bucket += plan.n
    y = _apply_universal(plan.alphabet, plan.m, z, counter)
    return y[:, 0] if vector else y


def _block_height(S: int, n: int) -> int:
    h = 1
    while S ** (h + 1) <= n:
        h += 1
    return h


def mailman_matmul(A, B, alphabet=None, counter: OpCounter | None = None) -> np.ndarray:
    """``A @ B`` for a finite-alphabet ``A``.

    Rows of ``A`` are split into blocks of height ``floor(log_S(cols(A)))``
    (at least 1), each with its own plan.
    """
    A = check_matrix(A, "A")
    B = np.asarray(B, dtype=np.float64)
    vector = B.ndim == 1
    B2 = B.reshape(-1, 1) if vector else B
    if B2.ndim != 2 or B2.shape[0] != A.shape[1]:
        raise ValueError(f"shape mismatch: A is {A.shape}, B is {B.shape}")
    alpha = _default_alphabet(A) if alphabet is None else _check_alphabet(alphabet)
    m, n = A.shape
    h = min(m, _block_height(alpha.size, n))
    out = np.empty((m, B2.shape[1]))
    for start in range(0, m, h):
        plan = build_plan(A[start:start + h], alpha)
        out[start:start + h] = apply_plan(plan, B2, counter)
    return out[:, 0] if vector else out


def naive_op_count(m: int, n: int) -> int:
    """Multiplications in a dense m x n matrix-vector product."""
    return m * n
