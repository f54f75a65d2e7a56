"""Eigensolver and eigenvector statistics."""

from .analysis import (
    BvhParameters,
    LocalizationOutcome,
    bvh_parameters,
    localization_event,
    localization_target,
    overlap,
)
from .lanczos import (
    USING_COMPILED,
    OperatorHandle,
    SpectralResult,
    operator_norm,
    top_k_eigs,
)

__all__ = [
    "BvhParameters",
    "LocalizationOutcome",
    "OperatorHandle",
    "SpectralResult",
    "USING_COMPILED",
    "bvh_parameters",
    "localization_event",
    "localization_target",
    "operator_norm",
    "overlap",
    "top_k_eigs",
]
