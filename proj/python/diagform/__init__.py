"""Diagonal form value statistics: correlations, diophantine counts, matrix census."""

from ._core import (
    Error,
    PreconditionError,
    ResourceError,
    __version__,
    census,
    count_below,
    count_equation,
    count_inequality,
    ell_correlation,
    fejer_chain_check,
    gap_sequence,
    ks_against_exponential,
    long_gaps,
    normalization_constant,
    sequence,
    smoothed_correlation,
    sweep,
)

__all__ = [
    "Error",
    "PreconditionError",
    "ResourceError",
    "__version__",
    "census",
    "count_below",
    "count_equation",
    "count_inequality",
    "ell_correlation",
    "fejer_chain_check",
    "gap_sequence",
    "ks_against_exponential",
    "long_gaps",
    "normalization_constant",
    "sequence",
    "smoothed_correlation",
    "sweep",
]
