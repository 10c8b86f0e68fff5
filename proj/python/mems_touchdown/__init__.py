"""Moving-mesh touchdown simulator and skeleton predictor."""

from ._core import (
    Domain,
    DomainError,
    EmptyResult,
    NoArrival,
    ResolutionError,
    Skeleton,
    SolveError,
    TriMesh,
    arrival_time,
    compute_skeleton,
    firefront,
    generate_mesh,
    metric_normalization,
    phi,
    predict_touchdown,
    profile_constants,
    quench_time_0d,
    simulate,
)

__all__ = [
    "Domain",
    "DomainError",
    "EmptyResult",
    "NoArrival",
    "ResolutionError",
    "Skeleton",
    "SolveError",
    "TriMesh",
    "arrival_time",
    "compute_skeleton",
    "firefront",
    "generate_mesh",
    "metric_normalization",
    "phi",
    "predict_touchdown",
    "profile_constants",
    "quench_time_0d",
    "simulate",
]
