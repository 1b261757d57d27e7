"""Matrix I/O and synthetic Gaussian mixtures."""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np

from ._validation import check_count
from .rng import as_generator

__all__ = ["DataFormatError", "load_matrix", "write_matrix", "GaussianMixtureSpec", "generate_mixture"]

DELIMITERS = {"csv": ",", "tsv": "\t"}


class DataFormatError(ValueError):
    """Input file is not a rectangular numeric grid."""


def _infer_format(path) -> str:
    return "tsv" if str(path).lower().endswith((".tsv", ".tab")) else "csv"


def _parse_row(cells):
    try:
        return [float(c) for c in cells]
    except ValueError:
        return None


def load_matrix(path, format: str | None = None) -> np.ndarray:
    """Read a csv/tsv grid (rows = samples). A single non-numeric first row is
    taken as a header and skipped; blank lines are ignored."""
    fmt = format or _infer_format(path)
    if fmt not in DELIMITERS:
        raise ValueError(f"unknown format {fmt!r}; expected csv or tsv")
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=DELIMITERS[fmt])
        rows, width = [], None
        for lineno, cells in enumerate(reader, start=1):
            cells = [c.strip() for c in cells]
            if not cells or all(c == "" for c in cells):
                continue
            values = _parse_row(cells)
            if values is None:
                if not rows and width is None:
                    width = len(cells)  # header row
                    continue
                for col, c in enumerate(cells, start=1):
                    try:
                        float(c)
                    except ValueError:
                        raise DataFormatError(
                            f"{path}: non-numeric cell {c!r} at line {lineno}, column {col}"
                        ) from None
            if width is None:
                width = len(values)
            if len(values) != width:
                raise DataFormatError(
                    f"{path}: line {lineno} has {len(values)} fields, expected {width}"
                )
            rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: no numeric data")
    M = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        i, j = np.argwhere(~np.isfinite(M))[0]
        raise DataFormatError(f"{path}: non-finite value at data row {i + 1}, column {j + 1}")
    return M


def write_matrix(M, path=None, format: str = "csv") -> str | None:
    """Write ``M`` with 17 significant digits; returns the text when ``path`` is None."""
    buf = io.StringIO()
    np.savetxt(buf, np.atleast_2d(np.asarray(M, dtype=np.float64)), fmt="%.17g",
               delimiter=DELIMITERS[format])
    text = buf.getvalue()
    if path is None:
        return text
    with open(os.fspath(path), "w", newline="") as fh:
        fh.write(text)
    return None


@dataclass(frozen=True)
class GaussianMixtureSpec:
    """``n`` points in ``d`` dimensions around ``k_true`` centers.

    Centers are pairwise exactly ``separation`` apart (a scaled random
    orthonormal frame when ``k_true <= d``, evenly spaced on a random line
    otherwise); each point adds ``sigma``-scaled Gaussian noise.
    """

    n: int
    d: int
    k_true: int
    separation: float = 10.0
    sigma: float = 1.0
    seed: int = 0


def generate_mixture(spec: GaussianMixtureSpec, rng=None):
    """Return ``(A, labels)``; ``rng`` overrides ``spec.seed`` when given."""
    n = check_count(spec.n, "n")
    d = check_count(spec.d, "d")
    k = check_count(spec.k_true, "k_true", 1, n)
    if spec.separation < 0 or spec.sigma < 0:
        raise ValueError("separation and sigma must be nonnegative")
    gen = as_generator(spec.seed if rng is None else rng)
    if k <= d:
        Q, _ = np.linalg.qr(gen.standard_normal((d, k)))
        centers = Q.T * (spec.separation / np.sqrt(2.0))
    else:
        u = gen.standard_normal(d)
        u /= np.linalg.norm(u)
        centers = np.arange(k)[:, None] * spec.separation * u[None, :]
    labels = gen.permutation(np.arange(n) % k)
    A = centers[labels] + spec.sigma * gen.standard_normal((n, d))
    return A, labels
