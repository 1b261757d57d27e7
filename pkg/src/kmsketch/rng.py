"""Seeded random matrices, Vose alias sampling and norm-proportional row sampling."""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_matrix

__all__ = [
    "RngStream",
    "as_generator",
    "gaussian_matrix",
    "sign_matrix",
    "achlioptas_matrix",
    "AliasTable",
    "build_alias_table",
    "SamplingOperator",
    "randomized_sampling",
    "sample_columns",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Each call to :meth:`generator` starts the stream from the beginning, so an
    operation handed the same ``RngStream`` twice sees the same numbers.
    Distinct ``stream_id`` values map to independent PCG64 states through
    numpy's ``SeedSequence`` spawn keys.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, numbers.Integral) or not 0 <= v <= _MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Coerce ``rng`` (RngStream, Generator, int seed or None) to a Generator.

    Generators are returned as-is and are therefore advanced by the caller.
    """
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, numbers.Integral) and not isinstance(rng, bool):
        return RngStream(int(rng) & _MASK64).generator()
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def gaussian_matrix(rng, rows: int, cols: int) -> np.ndarray:
    """i.i.d. standard normal ``rows x cols`` matrix."""
    rows = check_count(rows, "rows")
    cols = check_count(cols, "cols")
    return as_generator(rng).standard_normal((rows, cols))


def sign_matrix(rng, rows: int, cols: int) -> np.ndarray:
    """Rademacher matrix with entries ``+-1/sqrt(cols)``, each sign w.p. 1/2."""
    rows = check_count(rows, "rows")
    cols = check_count(cols, "cols")
    bits = as_generator(rng).integers(0, 2, size=(rows, cols), dtype=np.int8)
    return (2.0 * bits - 1.0) / np.sqrt(cols)


def achlioptas_matrix(rng, rows: int, cols: int) -> np.ndarray:
    """Sparse projection with entries ``+-sqrt(3/cols)`` w.p. 1/6 each, else 0."""
    rows = check_count(rows, "rows")
    cols = check_count(cols, "cols")
    # 0 -> -1, 1..4 -> 0, 5 -> +1
    u = as_generator(rng).integers(0, 6, size=(rows, cols), dtype=np.int8)
    signs = (u == 5).astype(np.float64) - (u == 0).astype(np.float64)
    return signs * np.sqrt(3.0 / cols)


@dataclass(frozen=True)
class AliasTable:
    """Vose alias table: O(n) build, O(1) per draw."""

    prob: np.ndarray
    alias: np.ndarray
    p: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.prob.shape[0])

    def sample(self, rng, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. indices (0-based)."""
        gen = as_generator(rng)
        col = gen.integers(0, self.n, size=size)
        coin = gen.random(size)
        return np.where(coin < self.prob[col], col, self.alias[col])


def build_alias_table(p, atol: float = 1e-9) -> AliasTable:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a nonempty 1-D probability vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("p contains non-finite entries")
    if np.any(p < 0):
        raise ValueError(f"negative probability at index {int(np.flatnonzero(p < 0)[0])}")
    total = float(p.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"probabilities sum to {total!r}, expected 1 within {atol}")

    n = p.size
    scaled = p * (n / total)
    prob = np.zeros(n)
    alias = np.arange(n)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    # leftovers are 1 up to rounding; never give a zero-probability index weight
    for i in large + small:
        if p[i] > 0:
            prob[i] = 1.0
        else:
            prob[i] = 0.0
            alias[i] = int(np.argmax(p))
    return AliasTable(prob=prob, alias=alias, p=p / total)


@dataclass(frozen=True)
class SamplingOperator:
    """Column selection ``Omega`` (stored as indices) and diagonal rescaling ``S``.

    ``omega[t]`` is the 0-based index drawn at trial ``t`` and
    ``s_diag[t] = 1 / sqrt(r * p[omega[t]])``.
    """

    omega: np.ndarray
    s_diag: np.ndarray
    n: int
    p: np.ndarray = field(repr=False)

    @property
    def r(self) -> int:
        return int(self.omega.shape[0])

    def omega_matrix(self) -> np.ndarray:
        Om = np.zeros((self.n, self.r))
        Om[self.omega, np.arange(self.r)] = 1.0
        return Om

    def matrix(self) -> np.ndarray:
        """Dense ``Omega @ S`` (n x r)."""
        return self.omega_matrix() * self.s_diag

    def apply(self, Y) -> np.ndarray:
        """``Y @ Omega @ S`` without materializing Omega."""
        Y = np.asarray(Y, dtype=np.float64)
        return Y[:, self.omega] * self.s_diag


def sample_columns(p, r, rng) -> SamplingOperator:
    """i.i.d. draws from the distribution ``p`` with ``1/sqrt(r p_i)`` rescaling."""
    p = np.asarray(p, dtype=np.float64)
    gen = as_generator(rng)
    table = build_alias_table(p)
    omega = table.sample(gen, r)
    if np.any(p[omega] <= 0):
        raise AssertionError("alias table drew a zero-probability index")
    s_diag = 1.0 / np.sqrt(r * p[omega])
    return SamplingOperator(omega=omega, s_diag=s_diag, n=p.size, p=p)


def randomized_sampling(M, r: int, rng) -> SamplingOperator:
    """Sample ``r`` rows of ``M`` i.i.d. with probability ``||M_(i)||^2 / ||M||_F^2``.

    Draws are with replacement, so ``r`` larger than ``rows(M)`` is allowed.
    """
    M = check_matrix(M)
    r = check_count(r, "r")
    row_sq = np.einsum("ij,ij->i", M, M)
    total = row_sq.sum()
    if total == 0.0:
        raise ValueError("row-norm distribution undefined for an all-zero matrix")
    return sample_columns(row_sq / total, r, as_generator(rng))
