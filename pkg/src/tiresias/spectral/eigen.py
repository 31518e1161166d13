"""Eigendecomposition of the m-self-adjoint Laplacian."""

import numpy as np
import scipy.linalg as sclinalg
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from tiresias.errors import SpectralError
from tiresias.mms.models import DiscreteSpace
from tiresias.spectral.models import SpectralData
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="EigenSolver")

FULL_DRIVERS = ("gvd", "gv", "gvx")
SUBSET_DRIVERS = ("gvx",)


def default_gap_tol(top_eigenvalue: float) -> float:
    """Cluster threshold 1e-6·(λ_{J_max} + 1)."""
    return 1e-6 * (top_eigenvalue + 1.0)


def cluster_eigenvalues(eigenvalues: np.ndarray, gap_tol: float) -> tuple[tuple[int, ...], ...]:
    """Split ascending eigenvalues into clusters at gaps of at least ``gap_tol``."""
    if eigenvalues.size == 0:
        return ()
    breaks = np.flatnonzero(np.diff(eigenvalues) >= gap_tol) + 1
    groups = np.split(np.arange(eigenvalues.size), breaks)
    return tuple(tuple(int(i) for i in group) for group in groups)


def _normalize_signs(eigenfunctions: np.ndarray) -> np.ndarray:
    peaks = np.argmax(np.abs(eigenfunctions), axis=1)
    signs = np.sign(eigenfunctions[np.arange(eigenfunctions.shape[0]), peaks])
    signs[signs == 0] = 1.0
    return eigenfunctions * signs[:, None]


def _solve(space: DiscreteSpace, j_max: int, driver: str) -> tuple[np.ndarray, np.ndarray]:
    n = space.vertex_count
    subset = None if j_max == n else [0, j_max - 1]
    try:
        values, vectors = sclinalg.eigh(
            space.stiffness,
            np.diag(space.measure),
            subset_by_index=subset,
            driver=driver,
        )
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SpectralError(f"eigensolver failed: {e}", details={"driver": driver}) from e

    eigenfunctions = vectors.T.copy()
    residuals = np.max(
        np.abs(space.laplacian @ eigenfunctions.T - eigenfunctions.T * values[None, :]), axis=0
    )
    limits = 1e-8 * np.maximum(1.0, np.abs(values))
    if np.any(residuals > limits):
        worst = int(np.argmax(residuals / limits))
        raise SpectralError(
            "eigenpair residual above tolerance",
            details={
                "driver": driver,
                "mode": worst,
                "residual": float(residuals[worst]),
                "limit": float(limits[worst]),
            },
        )
    return values, eigenfunctions


def eigensolve(
    space: DiscreteSpace,
    j_max: int | None = None,
    gap_tol: float | None = None,
    tail_declared: bool = False,
) -> SpectralData:
    """Compute m-orthonormal eigenpairs of the space's Laplacian.

    Solves the generalized problem W φ = λ M φ. The constant mode is pinned to
    λ_0 = 0 and φ_0 = m(X)^{-1/2}; other modes are sign-normalized so their
    largest-magnitude entry is positive. LAPACK drivers are tried in turn when
    a solve fails or leaves residuals above 1e-8·max(1, λ).

    Args:
        space: Space to diagonalize
        j_max: Number of modes (default: all)
        gap_tol: Cluster threshold (default 1e-6·(λ_{J_max}+1))
        tail_declared: Mark a truncated spectrum as usable by the wave solver

    Returns:
        SpectralData

    Raises:
        SpectralError: If every driver fails, with residual norms attached
    """
    n = space.vertex_count
    j_max = n if j_max is None else j_max
    if not 1 <= j_max <= n:
        raise SpectralError("j_max out of range", details={"j_max": j_max, "vertices": n})

    drivers = FULL_DRIVERS if j_max == n else SUBSET_DRIVERS
    attempts = iter(drivers)
    values = eigenfunctions = None
    for attempt in Retrying(
        stop=stop_after_attempt(len(drivers)),
        retry=retry_if_exception_type(SpectralError),
        reraise=True,
    ):
        with attempt:
            driver = next(attempts)
            values, eigenfunctions = _solve(space, j_max, driver)
            if attempt.retry_state.attempt_number > 1:
                logger.warning("eigensolve_driver_fallback", driver=driver)
    assert values is not None and eigenfunctions is not None

    order = np.argsort(values, kind="stable")
    values = values[order]
    eigenfunctions = _normalize_signs(eigenfunctions[order])

    if abs(values[0]) > 1e-10 * max(1.0, abs(values[-1])):
        raise SpectralError("lowest eigenvalue is not zero", details={"lambda_0": float(values[0])})
    values[0] = 0.0
    eigenfunctions[0] = 1.0 / np.sqrt(space.total_mass)

    gap_tol = gap_tol if gap_tol is not None else default_gap_tol(float(values[-1]))
    clusters = cluster_eigenvalues(values, gap_tol)

    values.setflags(write=False)
    eigenfunctions.setflags(write=False)
    logger.info(
        "eigensolve_complete",
        space=space.name,
        modes=j_max,
        clusters=len(clusters),
        lambda_1=float(values[1]) if j_max > 1 else None,
    )
    return SpectralData(
        eigenvalues=values,
        eigenfunctions=eigenfunctions,
        measure=space.measure,
        clusters=clusters,
        gap_tol=gap_tol,
        tail_declared=tail_declared,
        space_name=space.name,
    )


def orthonormality_defect(spec: SpectralData) -> float:
    """max |Σ_i m_i φ_j(i) φ_k(i) − δ_jk|."""
    gram = (spec.eigenfunctions * spec.measure[None, :]) @ spec.eigenfunctions.T
    return float(np.max(np.abs(gram - np.eye(spec.mode_cutoff))))
