"""Gauge fixing of a cluster kernel into eigenfunction values on V."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sclinalg

from tiresias.errors import RankAmbiguityError
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="GaugeFixer")

AMBIGUITY_BAND = (0.1, 10.0)


@dataclass(frozen=True, eq=False)
class GaugeFixResult:
    """Eigenfunction values recovered from one cluster kernel.

    Attributes:
        values: Gauge-fixed eigenfunctions on V, shape (m, |V|)
        multiplicity: Numerical rank m
        points: Selected window positions x_1..x_m
        min_singular: Smallest singular value of Q on the selected points
        reconstruction_residual: max |valuesᵀ values − Q|
    """

    values: np.ndarray
    multiplicity: int
    points: tuple[int, ...]
    min_singular: float
    reconstruction_residual: float


def numerical_rank(kernel: np.ndarray, measure: np.ndarray, rel_tol: float = 1e-6) -> int:
    """Rank of the m|_V-weighted operator of a symmetric kernel.

    Raises:
        RankAmbiguityError: If an eigenvalue sits within a decade of the threshold
    """
    root = np.sqrt(measure)
    spectrum = np.abs(np.linalg.eigvalsh(root[:, None] * kernel * root[None, :]))
    top = float(spectrum.max()) if spectrum.size else 0.0
    if top == 0.0:
        return 0
    threshold = rel_tol * top
    low, high = AMBIGUITY_BAND
    ambiguous = spectrum[(spectrum >= low * threshold) & (spectrum <= high * threshold)]
    if ambiguous.size:
        raise RankAmbiguityError(
            "cluster rank cannot be decided; use more points or a smaller cluster tolerance",
            details={"threshold": threshold, "ambiguous": [float(s) for s in ambiguous]},
        )
    return int(np.count_nonzero(spectrum >= threshold))


def pivot_points(kernel: np.ndarray, rank: int) -> list[int]:
    """Greedy max-diagonal pivoted Cholesky selection of ``rank`` points."""
    residual = np.array(kernel, dtype=float, copy=True)
    points: list[int] = []
    for _ in range(rank):
        pivot = int(np.argmax(np.diag(residual)))
        points.append(pivot)
        column = residual[:, pivot].copy()
        residual -= np.outer(column, column) / column[pivot]
    return points


def symmetric_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Symmetric square root with negative eigenvalues clipped at 0."""
    values, vectors = np.linalg.eigh(0.5 * (matrix + matrix.T))
    result: np.ndarray = (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T
    return result


def gauge_fix_cluster(
    kernel: np.ndarray, measure: np.ndarray, rel_tol: float = 1e-6
) -> GaugeFixResult:
    """Turn Q_j into eigenfunction values on V, up to an orthogonal factor.

    Builds the cardinal basis v_k(x_l) = δ_kl on pivoted points, then applies
    P = Q_pp^{1/2}, the positive factor of the polar decomposition. The output
    P·(v_1..v_m)ᵀ reproduces Q_j exactly when its rank is m.

    Args:
        kernel: Symmetric Q_j on V × V
        measure: m restricted to V
        rel_tol: Relative rank threshold

    Returns:
        GaugeFixResult

    Raises:
        RankAmbiguityError: If the rank is ambiguous or zero
    """
    kernel = 0.5 * (kernel + kernel.T)
    rank = numerical_rank(kernel, measure, rel_tol)
    if rank == 0:
        raise RankAmbiguityError("cluster kernel vanishes on the window")

    points = pivot_points(kernel, rank)
    block = kernel[np.ix_(points, points)]
    cardinal = sclinalg.solve(block, kernel[points, :], assume_a="sym")
    values = symmetric_sqrt(block) @ cardinal

    if rank == 1:
        peak = int(np.argmax(np.abs(values[0])))
        if values[0, peak] < 0:
            values = -values

    singular = np.linalg.svd(block, compute_uv=False)
    residual = float(np.max(np.abs(values.T @ values - kernel)))
    logger.debug(
        "cluster_gauge_fixed",
        multiplicity=rank,
        points=points,
        min_singular=float(singular[-1]),
        residual=residual,
    )
    return GaugeFixResult(
        values=values,
        multiplicity=rank,
        points=tuple(points),
        min_singular=float(singular[-1]),
        reconstruction_residual=residual,
    )
