"""Boundary Control: influence domains, slice volumes and distance profiles."""

from tiresias.control.models import (
    InfluenceDomain,
    PointEigenvalues,
    ProfileCandidate,
    ProfileSearchResult,
    SliceFamily,
    VolumeEstimate,
    domain_of_influence,
)
from tiresias.control.projections import (
    ProjectionEngine,
    alternating_projection,
    controllability_gram,
    difference_projector,
    range_projector,
)
from tiresias.control.slices import (
    evaluate_profile,
    nearest_spacing,
    profile_collisions,
    recover_distance_function,
    recover_point_eigenvalues,
    search_profiles,
    true_profiles,
)
from tiresias.control.sources import ControlBasis, generators_near

__all__ = [
    "ControlBasis",
    "InfluenceDomain",
    "PointEigenvalues",
    "ProfileCandidate",
    "ProfileSearchResult",
    "ProjectionEngine",
    "SliceFamily",
    "VolumeEstimate",
    "alternating_projection",
    "controllability_gram",
    "difference_projector",
    "domain_of_influence",
    "evaluate_profile",
    "generators_near",
    "nearest_spacing",
    "profile_collisions",
    "range_projector",
    "recover_distance_function",
    "recover_point_eigenvalues",
    "search_profiles",
    "true_profiles",
]
