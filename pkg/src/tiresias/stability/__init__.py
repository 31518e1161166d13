"""Stability: spectral ε-approximations, map distortion and ladders."""

from tiresias.stability.approx import (
    approximation_report,
    eigen_eps,
    gh_distortion,
    heat_ratio_eps,
    mode_errors,
    self_consistent_time_eps,
)
from tiresias.stability.extension import (
    PipelineSettings,
    ProfileRun,
    extend_map_via_pipeline,
    extract_side,
    match_profiles,
    recover_profile_run,
    stability_ladder,
)
from tiresias.stability.models import ApproxReport, ExtensionResult, StabilityLadder, VertexMap

__all__ = [
    "ApproxReport",
    "ExtensionResult",
    "PipelineSettings",
    "ProfileRun",
    "StabilityLadder",
    "VertexMap",
    "approximation_report",
    "eigen_eps",
    "extend_map_via_pipeline",
    "extract_side",
    "gh_distortion",
    "heat_ratio_eps",
    "match_profiles",
    "mode_errors",
    "recover_profile_run",
    "self_consistent_time_eps",
    "stability_ladder",
]
