"""Spectral extraction from heat-kernel observations on a window."""

from tiresias.gelfand.extractor import (
    MassErrorBar,
    SpectralExtractor,
    monte_carlo_mass,
    twist_gauge,
    window_spectral_data,
)
from tiresias.gelfand.gauge import (
    GaugeFixResult,
    gauge_fix_cluster,
    numerical_rank,
    pivot_points,
    symmetric_sqrt,
)
from tiresias.gelfand.kernels import ClusterKernels, recover_cluster_kernels, recover_Qj
from tiresias.gelfand.models import ClusterConditioning, ExtractedSpectrum, ExtractionAudit
from tiresias.gelfand.trace import (
    EigenvalueRecovery,
    MassEstimate,
    PeelResult,
    heat_trace_on_V,
    noise_floor,
    peel_exponentials,
    recover_eigenvalues,
    recover_mass_and_phi0,
    refine_on_clean_region,
)

__all__ = [
    "ClusterConditioning",
    "ClusterKernels",
    "EigenvalueRecovery",
    "ExtractedSpectrum",
    "ExtractionAudit",
    "GaugeFixResult",
    "MassErrorBar",
    "MassEstimate",
    "PeelResult",
    "SpectralExtractor",
    "gauge_fix_cluster",
    "heat_trace_on_V",
    "monte_carlo_mass",
    "noise_floor",
    "numerical_rank",
    "peel_exponentials",
    "pivot_points",
    "recover_Qj",
    "recover_cluster_kernels",
    "recover_eigenvalues",
    "recover_mass_and_phi0",
    "refine_on_clean_region",
    "symmetric_sqrt",
    "twist_gauge",
    "window_spectral_data",
]
