"""Randomized dimensionality reduction for k-means clustering."""

__version__ = "0.1.0"

from ._validation import NumericalError
from .ffsvd import FfsvdResult, fast_frobenius_svd
from .kmeans import (
    ClusterIndicator,
    KmeansSolution,
    LloydKMeans,
    brute_force_optimum,
    cost,
    gamma_approx_kmeans,
    indicator_from_assignment,
    lloyd,
)
from .mailman import MailmanPlan, apply_plan, build_plan, mailman_matmul, universal_column
from .reducers import (
    ApproxSVDProjection,
    GaussianJLProjection,
    LeverageScoreSelector,
    RandomizedSamplingSelector,
    RandomSignProjection,
    SketchOutput,
    leverage_scores,
    reduce_approx_svd,
    reduce_gaussian_jl,
    reduce_leverage_select,
    reduce_random_projection,
    reduce_sampling_select,
)
from .rng import RngStream

__all__ = [
    "ApproxSVDProjection",
    "ClusterIndicator",
    "FfsvdResult",
    "GaussianJLProjection",
    "KmeansSolution",
    "LeverageScoreSelector",
    "LloydKMeans",
    "MailmanPlan",
    "NumericalError",
    "RandomSignProjection",
    "RandomizedSamplingSelector",
    "RngStream",
    "SketchOutput",
    "apply_plan",
    "brute_force_optimum",
    "build_plan",
    "cost",
    "fast_frobenius_svd",
    "gamma_approx_kmeans",
    "indicator_from_assignment",
    "leverage_scores",
    "lloyd",
    "mailman_matmul",
    "reduce_approx_svd",
    "reduce_gaussian_jl",
    "reduce_leverage_select",
    "reduce_random_projection",
    "reduce_sampling_select",
    "universal_column",
]
