"""Input validation helpers shared by the functional API and the estimators."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


class NumericalError(ArithmeticError):
    """A numerical routine failed (non-convergence, rank deficiency, ...)."""


def check_matrix(M, name="M", copy=False):
    """Return ``M`` as a finite 2-D float64 array.

    Raises ``ValueError`` on NaN/Inf, ragged input, or wrong dimensionality.
    """
    try:
        return check_array(
            M,
            dtype=np.float64,
            ensure_2d=True,
            ensure_all_finite=True,
            ensure_min_samples=1,
            ensure_min_features=1,
            copy=copy,
            input_name=name,
        )
    except ValueError as exc:
        raise ValueError(f"{name}: {exc}") from exc


def check_count(value, name, low=1, high=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < low or (high is not None and value > high):
        hi = "inf" if high is None else high
        raise ValueError(f"{name}={value} outside [{low}, {hi}]")
    return value


def check_eps(eps, low=0.0, high=1.0, name="eps"):
    eps = float(eps)
    if not (low < eps < high):
        raise ValueError(f"{name}={eps} must lie in the open interval ({low}, {high})")
    return eps
