"""Assemble the metric-measure copy from extracted and continued eigendata."""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd
from scipy.linalg import orthogonal_procrustes

from tiresias.gelfand.models import ExtractedSpectrum
from tiresias.mms.models import DiscreteSpace
from tiresias.reconstruct.density import (
    CANDIDATE_DIMENSIONS,
    DensityCalibration,
    density_profile,
)
from tiresias.reconstruct.models import CUT_LOCUS_FRACTION, ComparisonReport, ReconstructionResult
from tiresias.reconstruct.varadhan import (
    FLOOR_FACTOR,
    WINDOW_POINTS,
    discretization_floor,
    varadhan_exponent,
    varadhan_matrix,
)
from tiresias.spectral.heat import geometric_grid
from tiresias.spectral.models import SpectralData
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="Assembler")

TRIANGLE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class ReferenceData:
    """Ground truth used only for the comparison report.

    Attributes:
        space: True space
        spectrum: True spectral data (for the gauge-aligned eigenfunction error)
        density: True density per vertex
    """

    space: DiscreteSpace
    spectrum: SpectralData | None = None
    density: np.ndarray | None = None


def synthesize_kernels(eigenvalues: np.ndarray, values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """p̂(p, q, t) = Σ_j e^{−λ_j t} φ̂_j(p) φ̂_j(q), shape (T, P, P).

    Cluster blocks enter only through Σ φφᵀ, so the result does not depend
    on the per-cluster gauge.
    """
    weights = np.exp(-np.outer(times, eigenvalues))
    kernels = np.einsum("tj,jp,jq->tpq", weights, values, values)
    result: np.ndarray = 0.5 * (kernels + np.swapaxes(kernels, 1, 2))
    return result


def gauge_aligned_error(
    values: np.ndarray,
    reference: np.ndarray,
    clusters: Sequence[Sequence[int]],
) -> float:
    """max |φ̂ R − φ| after the best orthogonal R per cluster.

    Args:
        values: Recovered values, shape (J, P)
        reference: True values on the same points, shape (≥J, P)
        clusters: Mode groups of the recovered data
    """
    worst = 0.0
    for cluster in clusters:
        index = list(cluster)
        recovered = values[index].T
        truth = reference[index].T
        rotation, _ = orthogonal_procrustes(recovered, truth)
        worst = max(worst, float(np.max(np.abs(recovered @ rotation - truth))))
    return worst


def _density_ratio_error(recovered: np.ndarray, truth: np.ndarray) -> float:
    ratio_hat = recovered / np.mean(recovered)
    ratio = truth / np.mean(truth)
    return float(np.max(np.abs(ratio_hat - ratio) / ratio))


def compare_with_reference(
    result_distance: np.ndarray,
    density: np.ndarray,
    mass: float,
    values: np.ndarray,
    clusters: Sequence[Sequence[int]],
    correspondence: np.ndarray,
    reference: ReferenceData,
) -> tuple[ComparisonReport, np.ndarray]:
    """Comparison report over points with a known correspondence.

    Returns:
        The report and the reference distances on all points (NaN where the
        correspondence is unknown)
    """
    known = np.flatnonzero(correspondence >= 0)
    vertices = correspondence[known]
    space = reference.space
    truth = space.distance[np.ix_(vertices, vertices)]
    estimate = result_distance[np.ix_(known, known)]

    diameter = float(space.metadata.diameter)
    upper = np.triu(np.ones_like(truth, dtype=bool), k=1)
    near = upper & (truth <= CUT_LOCUS_FRACTION * diameter)
    far = upper & ~near
    errors = np.abs(estimate - truth)

    density_error = float("nan")
    if reference.density is not None and known.size:
        density_error = _density_ratio_error(density[known], reference.density[vertices])
    eigen_error = float("nan")
    if reference.spectrum is not None and known.size:
        eigen_error = gauge_aligned_error(
            values[:, known], reference.spectrum.eigenfunctions[:, vertices], clusters
        )

    full = np.full(result_distance.shape, np.nan)
    full[np.ix_(known, known)] = truth
    report = ComparisonReport(
        max_metric_distortion=float(errors[near].max()) if np.any(near) else 0.0,
        far_pair_distortion=float(errors[far].max()) if np.any(far) else 0.0,
        diameter=diameter,
        mass_error=abs(mass - space.total_mass) / space.total_mass,
        density_ratio_error=density_error,
        eigenfunction_error=eigen_error,
        pairs_compared=int(np.count_nonzero(near)),
    )
    return report, full


def assemble_space(
    extracted: ExtractedSpectrum,
    point_values: np.ndarray | None = None,
    point_correspondence: Sequence[int] | None = None,
    times: np.ndarray | None = None,
    varadhan_t_max: float = 1.0,
    density_t_max: float | None = None,
    dimensions: Sequence[int] = CANDIDATE_DIMENSIONS,
    calibration: Mapping[int, DensityCalibration] | None = None,
    floor_factor: float = FLOOR_FACTOR,
    window_points: int = WINDOW_POINTS,
    varadhan_on_window: bool = False,
    reference: ReferenceData | None = None,
    provenance: Mapping[str, Any] | None = None,
) -> ReconstructionResult:
    """Rebuild distances and density on V plus the recovered interior points.

    Window pairs keep the observed metric on V unless ``varadhan_on_window``
    is set; every pair involving a recovered point comes from Varadhan fits
    on the synthesized kernel p̂.

    Args:
        extracted: Extracted spectral data on V
        point_values: φ̂_j at recovered points, shape (J, Q)
        point_correspondence: True vertex of each recovered point (validation only)
        times: Small-t grid (default: geometric from 10·h² to ``varadhan_t_max``)
        varadhan_t_max: Upper end of the default grid
        density_t_max: Upper end of the density fit window
        dimensions: Candidate dimensions for n̂
        calibration: Calibrated κ_n per dimension
        floor_factor: Discretization floor factor (t ≥ factor·h²)
        window_points: Varadhan fit window length
        varadhan_on_window: Fit window pairs too instead of using the V metric
        reference: Ground truth for the comparison report
        provenance: Extra provenance entries

    Returns:
        ReconstructionResult

    Raises:
        DimensionAmbiguityError: From density recovery
    """
    t_floor = discretization_floor(extracted.mesh_size, floor_factor)
    if times is None:
        times = geometric_grid(t_floor, varadhan_t_max)
    extra = np.zeros((extracted.mode_cutoff, 0)) if point_values is None else point_values
    if extra.shape[0] != extracted.mode_cutoff:
        raise ValueError(
            f"point values carry {extra.shape[0]} modes, extracted data {extracted.mode_cutoff}"
        )
    values = np.hstack([extracted.eigenfunctions, extra])
    size = extracted.size
    labels = tuple(f"V:{int(v)}" for v in extracted.vertices) + tuple(
        f"p:{k}" for k in range(extra.shape[1])
    )
    correspondence = np.concatenate(
        [
            extracted.vertices.astype(np.int64),
            np.asarray(
                point_correspondence
                if point_correspondence is not None
                else np.full(extra.shape[1], -1),
                dtype=np.int64,
            ),
        ]
    )

    logger.info(
        "assemble_start",
        window=size,
        points=int(extra.shape[1]),
        modes=extracted.mode_cutoff,
        t_floor=t_floor,
    )
    kernels = synthesize_kernels(extracted.eigenvalues, values, times)
    fits = varadhan_matrix(times, kernels, t_floor=t_floor, window_points=window_points)
    distance = fits.distance.copy()
    if not varadhan_on_window:
        distance[:size, :size] = extracted.window_distance
        distance = 0.5 * (distance + distance.T)
        np.fill_diagonal(distance, 0.0)

    diag = np.diagonal(kernels, axis1=1, axis2=2)
    densities = density_profile(
        times,
        diag,
        dimensions=dimensions,
        calibration=calibration,
        t_floor=t_floor,
        t_max=density_t_max,
    )

    comparison = None
    reference_distance = None
    if reference is not None:
        comparison, reference_distance = compare_with_reference(
            distance,
            densities.density,
            extracted.mass,
            values,
            extracted.clusters,
            correspondence,
            reference,
        )

    record: dict[str, Any] = {
        "extraction": extracted.provenance,
        "modes": extracted.mode_cutoff,
        "t_floor": t_floor,
        "t_max": float(times[-1]),
        "window_points": window_points,
        "varadhan_on_window": varadhan_on_window,
        "dimensions": list(dimensions),
        "calibrated": sorted(calibration) if calibration else [],
    }
    record.update(provenance or {})
    result = ReconstructionResult(
        labels=labels,
        correspondence=correspondence,
        distance=distance,
        density=densities.density,
        dimension=densities.dimension,
        mass=extracted.mass,
        eigenvalues=extracted.eigenvalues,
        point_values=values,
        varadhan=fits,
        times=times,
        comparison=comparison,
        reference_distance=reference_distance,
        provenance=record,
    )

    violation = result.max_triangle_violation()
    if violation > TRIANGLE_TOLERANCE * max(1.0, float(distance.max())):
        logger.warning("triangle_violations", worst=violation)
    logger.info(
        "assemble_complete",
        points=result.size,
        max_distance=float(distance.max()),
        distortion=comparison.max_metric_distortion if comparison else None,
    )
    return result


def varadhan_frame(result: ReconstructionResult) -> pd.DataFrame:
    """One row per (pair, t): normalized exponent y and the fitted line.

    Columns: p, q, t, y, fit (p < q).
    """
    kernels = synthesize_kernels(result.eigenvalues, result.point_values, result.times)
    diag = np.diagonal(kernels, axis1=1, axis2=2)
    p, q = np.triu_indices(result.size, k=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = varadhan_exponent(result.times[:, None], kernels[:, p, q], diag[:, p], diag[:, q])
    intercept = result.varadhan.intercept[p, q]
    slope = result.varadhan.slope[p, q]
    fit = intercept[None, :] + slope[None, :] * result.times[:, None]
    count = result.times.size
    return pd.DataFrame(
        {
            "p": np.tile(p, count),
            "q": np.tile(q, count),
            "t": np.repeat(result.times, p.size),
            "y": y.ravel(),
            "fit": fit.ravel(),
        }
    )
