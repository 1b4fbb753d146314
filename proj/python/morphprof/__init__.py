"""Particle morphology profiling: descriptors, clustering and validity indices."""

from ._core import (
    ConfigError,
    Error,
    InputError,
    NumericError,
    adjusted_rand,
    calinski_harabasz,
    class_names,
    davies_bouldin,
    descriptor,
    generate_dataset,
    generate_particle,
    gmm,
    gpmix,
    kmeans,
    radial_profile,
    run_pipeline,
    segment,
    select_k_bic,
    select_k_silhouette,
    shape_metrics,
    silhouette,
)

__all__ = [
    "ConfigError",
    "Error",
    "InputError",
    "NumericError",
    "adjusted_rand",
    "calinski_harabasz",
    "class_names",
    "davies_bouldin",
    "descriptor",
    "generate_dataset",
    "generate_particle",
    "gmm",
    "gpmix",
    "kmeans",
    "radial_profile",
    "run_pipeline",
    "segment",
    "select_k_bic",
    "select_k_silhouette",
    "shape_metrics",
    "silhouette",
]
