"""Reconstruction: Varadhan distances, density recovery and assembly."""

from tiresias.reconstruct.assemble import (
    ReferenceData,
    assemble_space,
    compare_with_reference,
    gauge_aligned_error,
    synthesize_kernels,
    varadhan_frame,
)
from tiresias.reconstruct.density import (
    DensityCalibration,
    DensityEstimate,
    DensityProfile,
    PlateauFit,
    analytic_constant,
    calibrate_density_constant,
    density_profile,
    density_recovery,
)
from tiresias.reconstruct.models import ComparisonReport, ReconstructionResult
from tiresias.reconstruct.varadhan import (
    VaradhanFit,
    VaradhanMatrix,
    discretization_floor,
    varadhan_distance,
    varadhan_exponent,
    varadhan_matrix,
)

__all__ = [
    "ComparisonReport",
    "DensityCalibration",
    "DensityEstimate",
    "DensityProfile",
    "PlateauFit",
    "ReconstructionResult",
    "ReferenceData",
    "VaradhanFit",
    "VaradhanMatrix",
    "analytic_constant",
    "assemble_space",
    "calibrate_density_constant",
    "compare_with_reference",
    "density_profile",
    "density_recovery",
    "discretization_floor",
    "gauge_aligned_error",
    "synthesize_kernels",
    "varadhan_frame",
    "varadhan_distance",
    "varadhan_exponent",
    "varadhan_matrix",
]
