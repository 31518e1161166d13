"""Cluster kernels Q_j(x, y) from the window heat samples."""

from dataclasses import dataclass

import numpy as np

from tiresias.gelfand.trace import EigenvalueRecovery
from tiresias.spectral.models import ObservationWindow
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="ClusterKernels")

PAIR_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ClusterKernels:
    """Jointly fitted kernels for every recovered cluster.

    Attributes:
        kernels: Q_j on V × V, shape (C, |V|, |V|); Q_0 is pinned to 1/m(X)
        pair_residuals: RMS relative fit residual per (x, y)
        fit_start: First time used by the fit
        flagged_pairs: (x, y) window positions with residual above tolerance
    """

    kernels: np.ndarray
    pair_residuals: np.ndarray
    fit_start: float
    flagged_pairs: tuple[tuple[int, int], ...]

    def __getitem__(self, cluster: int) -> np.ndarray:
        kernel: np.ndarray = self.kernels[cluster]
        return kernel


def recover_cluster_kernels(
    obs: ObservationWindow,
    recovery: EigenvalueRecovery,
    mass_rec: float,
    residual_tol: float = PAIR_RESIDUAL_TOL,
) -> ClusterKernels:
    """Fit p(x, y, t) − 1/m(X) = Σ_{c≥1} e^{−λ_c t} Q_c(x, y) for every pair.

    One weighted linear least-squares problem with a shared design matrix is
    solved for all pairs at once, over the times where the peeling model
    held. The discarded guard rates and a constant column stay in the
    design; the constant absorbs the error of 1/m(X) and is dropped. Rows
    are weighted by the inverse diagonal scale so every time counts
    relatively.

    Args:
        obs: Observation window
        recovery: Recovered eigenvalue clusters
        mass_rec: Recovered m(X)
        residual_tol: Per-pair RMS relative residual that triggers a flag

    Returns:
        ClusterKernels, symmetrized
    """
    times = obs.t_grid
    rates = recovery.rates[1:]
    kept = min(recovery.requested, recovery.peel.achieved)
    guards = recovery.peel.rates[kept:]
    design_rates = np.concatenate([rates, guards, [0.0]])

    region = times >= recovery.peel.model_start
    if np.count_nonzero(region) <= design_rates.size:
        region = np.ones_like(times, dtype=bool)
    t_fit = times[region]
    size = obs.size

    target = obs.heat_samples[region] - 1.0 / mass_rec
    scale = np.max(np.diagonal(obs.heat_samples[region], axis1=1, axis2=2), axis=1)
    weights = 1.0 / scale

    design = np.exp(-np.outer(t_fit, design_rates)) * weights[:, None]
    rhs = target.reshape(t_fit.size, -1) * weights[:, None]
    coefficients, *_ = np.linalg.lstsq(design, rhs, rcond=None)

    fitted = design @ coefficients
    pair_residuals = np.sqrt(np.mean((fitted - rhs) ** 2, axis=0)).reshape(size, size)

    kernels = np.empty((rates.size + 1, size, size))
    kernels[0] = 1.0 / mass_rec
    kernels[1:] = coefficients[: rates.size].reshape(rates.size, size, size)
    kernels = 0.5 * (kernels + np.swapaxes(kernels, 1, 2))

    rows, cols = np.nonzero(np.triu(pair_residuals > residual_tol))
    flagged = tuple((int(x), int(y)) for x, y in zip(rows, cols, strict=True))
    if flagged:
        logger.warning(
            "cluster_kernel_residuals", flagged=len(flagged), worst=float(pair_residuals.max())
        )
    logger.debug("cluster_kernels_fitted", clusters=int(rates.size + 1), samples=int(t_fit.size))
    return ClusterKernels(
        kernels=kernels,
        pair_residuals=pair_residuals,
        fit_start=float(t_fit[0]),
        flagged_pairs=flagged,
    )


def recover_Qj(
    obs: ObservationWindow, recovery: EigenvalueRecovery, mass_rec: float, j: int
) -> np.ndarray:
    """Q_j on V × V for one cluster (see ``recover_cluster_kernels``)."""
    if not 0 <= j < recovery.rates.size:
        raise IndexError(f"cluster {j} not recovered (have {recovery.rates.size})")
    return recover_cluster_kernels(obs, recovery, mass_rec)[j]
