"""Spectral decomposition and heat-kernel synthesis."""

from tiresias.spectral.bounds import (
    EigenBoundsReport,
    GaussianDiagnostic,
    check_eigen_bounds,
    gaussian_diagnostic,
)
from tiresias.spectral.eigen import (
    cluster_eigenvalues,
    default_gap_tol,
    eigensolve,
    orthonormality_defect,
)
from tiresias.spectral.heat import (
    export_observation,
    geometric_grid,
    heat_kernel,
    heat_kernel_matrix,
    heat_kernel_stack,
    sample_observation,
    semigroup_residual,
    stochastic_defect,
    uniformized_heat_matrix,
)
from tiresias.spectral.models import ObservationWindow, SpectralData

__all__ = [
    "EigenBoundsReport",
    "GaussianDiagnostic",
    "ObservationWindow",
    "SpectralData",
    "check_eigen_bounds",
    "cluster_eigenvalues",
    "default_gap_tol",
    "eigensolve",
    "export_observation",
    "gaussian_diagnostic",
    "geometric_grid",
    "heat_kernel",
    "heat_kernel_matrix",
    "heat_kernel_stack",
    "orthonormality_defect",
    "sample_observation",
    "semigroup_residual",
    "stochastic_defect",
    "uniformized_heat_matrix",
]
