"""Spectral ε-approximation checkers and map distortion.

Both ε measures are self-consistent: the heat-ratio bound is required on
[ε, 1] only, and the eigendata bound on modes up to ⌊1/ε⌋ only, so each is
reported as the smallest ε that satisfies its own window.
"""

from collections.abc import Sequence

import numpy as np
from scipy.linalg import orthogonal_procrustes

from tiresias.errors import StabilityError
from tiresias.mms.models import DiscreteSpace
from tiresias.spectral.heat import geometric_grid, uniformized_heat_matrix
from tiresias.spectral.models import SpectralData
from tiresias.stability.models import ApproxReport, VertexMap
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="ApproxChecker")

DEFAULT_T_MIN = 1e-3
GRID_POINTS_PER_DECADE = 16


def _domain(psi: VertexMap, ball: Sequence[int] | np.ndarray | None) -> VertexMap:
    return psi if ball is None else psi.restrict(ball)


def self_consistent_time_eps(times: np.ndarray, deviations: np.ndarray) -> float:
    """Smallest ε with max_{t ≥ ε} deviation(t) ≤ ε over the grid.

    For ε in (t_{i−1}, t_i] the binding tail is deviations[i:], so the answer
    is min_i max(tail_max_i, t_{i−1}) with t_{−1} = 0.
    """
    tail = np.maximum.accumulate(deviations[::-1])[::-1]
    previous = np.concatenate([[0.0], times[:-1]])
    return float(np.min(np.maximum(tail, previous)))


def heat_ratio_eps(
    space_x: DiscreteSpace,
    space_y: DiscreteSpace,
    psi: VertexMap,
    ball: Sequence[int] | np.ndarray | None = None,
    times: np.ndarray | None = None,
) -> float:
    """Smallest ε with |p_Y(ψx₁, ψx₂, t) / p_X(x₁, x₂, t) − 1| ≤ ε on B × B × [ε, 1].

    Kernels come from the uniformized (nonnegative) synthesis so small
    off-diagonal values keep their relative accuracy.

    Args:
        space_x: First space
        space_y: Second space
        psi: Vertex map X → Y
        ball: Vertices of X the bound is tested on (default: the map domain)
        times: Time grid inside (0, 1] (default: geometric from 1e−3 to 1)

    Raises:
        StabilityError: If ψ leaves either space or the grid leaves (0, 1]
    """
    psi.validate(space_x, space_y)
    mapped = _domain(psi, ball)
    if times is None:
        times = geometric_grid(DEFAULT_T_MIN, 1.0, GRID_POINTS_PER_DECADE)
    if np.any(times <= 0) or np.any(times > 1.0):
        raise StabilityError("time window must lie in (0, 1]", details={"t_max": float(times.max())})

    rows_x, rows_y = mapped.domain, mapped.image
    deviations = np.empty(times.size)
    for k, t in enumerate(times):
        p_x = uniformized_heat_matrix(space_x, float(t))[np.ix_(rows_x, rows_x)]
        p_y = uniformized_heat_matrix(space_y, float(t))[np.ix_(rows_y, rows_y)]
        ratio = np.divide(p_y, p_x, out=np.full_like(p_x, np.inf), where=p_x > 0)
        ratio[(p_x == 0) & (p_y == 0)] = 1.0
        deviations[k] = float(np.max(np.abs(ratio - 1.0)))

    eps = self_consistent_time_eps(times, deviations)
    logger.info(
        "heat_ratio_eps",
        space_x=space_x.name,
        space_y=space_y.name,
        points=mapped.size,
        eps=eps,
        worst_time=float(times[int(np.argmax(deviations))]),
    )
    return eps


def _matched_modes(spec_x: SpectralData, spec_y: SpectralData) -> tuple[list[tuple[int, ...]], bool]:
    """Leading clusters with equal multiplicities and whether a mismatch stopped the walk."""
    matched: list[tuple[int, ...]] = []
    for cluster_x, cluster_y in zip(spec_x.clusters, spec_y.clusters, strict=False):
        if cluster_x != cluster_y:
            return matched, True
        matched.append(cluster_x)
    return matched, False


def mode_errors(
    spec_x: SpectralData,
    spec_y: SpectralData,
    psi: VertexMap,
    clusters: Sequence[tuple[int, ...]],
) -> np.ndarray:
    """|λ_i^Y − λ_i^X| + max_z |(φ^Y R)_i(ψz) − φ_i^X(z)| per mode.

    R is the orthogonal Procrustes alignment of each cluster block.
    """
    modes = clusters[-1][-1] + 1 if clusters else 0
    errors = np.zeros(modes)
    for cluster in clusters:
        index = list(cluster)
        values_x = spec_x.eigenfunctions[np.ix_(index, psi.domain)].T
        values_y = spec_y.eigenfunctions[np.ix_(index, psi.image)].T
        rotation, _ = orthogonal_procrustes(values_y, values_x)
        aligned = values_y @ rotation
        drift = np.abs(spec_y.eigenvalues[index] - spec_x.eigenvalues[index])
        errors[index] = drift + np.max(np.abs(aligned - values_x), axis=0)
    return errors


def eigen_eps(
    spec_x: SpectralData,
    spec_y: SpectralData,
    psi: VertexMap,
    ball: Sequence[int] | np.ndarray | None = None,
) -> tuple[float, bool]:
    """Smallest ε with per-mode error < ε for every mode i ≤ ⌊1/ε⌋.

    Args:
        spec_x: Spectral data of X
        spec_y: Spectral data of Y
        psi: Vertex map X → Y
        ball: Vertices of X the values are compared on (default: the map domain)

    Returns:
        (ε, structural_defect); ε is ``inf`` when the cluster multiplicities
        differ before a self-consistent ε is reached
    """
    mapped = _domain(psi, ball)
    clusters, mismatch = _matched_modes(spec_x, spec_y)
    errors = mode_errors(spec_x, spec_y, mapped, clusters)
    if errors.size and not np.any(errors):
        return 0.0, False

    cumulative = np.maximum.accumulate(errors)
    best = float("inf")
    for k in range(1, errors.size):
        candidate = max(float(cumulative[k]), 1.0 / (k + 1))
        if candidate <= 1.0 / k:
            best = min(best, candidate)
    exhaustive = not mismatch and errors.size == spec_x.vertex_count == spec_y.vertex_count
    if exhaustive and errors.size > 1 and cumulative[-1] <= 1.0 / (errors.size - 1):
        best = min(best, float(cumulative[-1]))
    if not np.isfinite(best):
        if mismatch:
            logger.warning(
                "eigen_structure_mismatch",
                space_x=spec_x.space_name,
                space_y=spec_y.space_name,
                matched_modes=int(errors.size),
            )
            return float("inf"), True
        best = max(1.0, float(cumulative[0]) if errors.size else 1.0)
    logger.info("eigen_eps", space_x=spec_x.space_name, space_y=spec_y.space_name, eps=best)
    return best, False


def gh_distortion(space_x: DiscreteSpace, space_y: DiscreteSpace, psi: VertexMap) -> tuple[float, float]:
    """(max |d_Y(ψx, ψy) − d_X(x, y)|, max_y d_Y(y, image ψ))."""
    psi.validate(space_x, space_y)
    d_x = space_x.distance[np.ix_(psi.domain, psi.domain)]
    d_y = space_y.distance[np.ix_(psi.image, psi.image)]
    distortion = float(np.max(np.abs(d_y - d_x))) if psi.size else 0.0
    image = np.unique(psi.image)
    defect = float(np.max(np.min(space_y.distance[:, image], axis=1))) if image.size else float("inf")
    return distortion, defect


def approximation_report(
    space_x: DiscreteSpace,
    space_y: DiscreteSpace,
    spec_x: SpectralData,
    spec_y: SpectralData,
    psi: VertexMap,
    ball: Sequence[int] | np.ndarray | None = None,
    times: np.ndarray | None = None,
) -> ApproxReport:
    """All three measurements for one map."""
    heat = heat_ratio_eps(space_x, space_y, psi, ball, times)
    eigen, structural = eigen_eps(spec_x, spec_y, psi, ball)
    distortion, defect = gh_distortion(space_x, space_y, psi)
    return ApproxReport(
        vertex_map=psi,
        heat_ratio_eps=heat,
        eigen_eps=eigen,
        gh_distortion=distortion,
        surjectivity_defect=defect,
        structural_defect=structural,
    )
