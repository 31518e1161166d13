"""Distances from short-time heat-kernel asymptotics.

With diagonal normalization y(t) = −4t [log p(x,y,t) − ½ log p(x,x,t) −
½ log p(y,y,t)] the Gaussian prefactor cancels and y(t) → d(x,y)². The limit
is taken by a linear fit of y against t on the best window of the grid.
"""

from dataclasses import dataclass

import numpy as np

from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="Varadhan")

WINDOW_POINTS = 16
MIN_WINDOW_POINTS = 3
MIN_RATIO = 1e-10
FLOOR_FACTOR = 10.0


def discretization_floor(mesh_size: float, factor: float = FLOOR_FACTOR) -> float:
    """Smallest usable time, factor·h²."""
    return factor * mesh_size**2


@dataclass(frozen=True)
class VaradhanFit:
    """Linear fit of y(t) = −4t log(normalized p) on one window.

    Attributes:
        distance: d̂ = (max(intercept, 0))^{1/2}
        intercept: Extrapolated y(0)
        slope: Fitted dy/dt
        window: (t_start, t_end) of the chosen window
        residual: RMS residual of the fit
        flagged: Whether no admissible window existed and all valid points were used
    """

    distance: float
    intercept: float
    slope: float
    window: tuple[float, float]
    residual: float
    flagged: bool = False


def varadhan_exponent(
    times: np.ndarray,
    values: np.ndarray,
    diag_x: np.ndarray | None = None,
    diag_y: np.ndarray | None = None,
) -> np.ndarray:
    """y(t) = −4t log p, diagonally normalized when both diagonals are given."""
    log_p = np.log(values)
    if diag_x is not None and diag_y is not None:
        log_p = log_p - 0.5 * np.log(diag_x) - 0.5 * np.log(diag_y)
    result: np.ndarray = -4.0 * times * log_p
    return result


def _linear_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(t, y, 1)
    residual = float(np.sqrt(np.mean((intercept + slope * t - y) ** 2)))
    return float(intercept), float(slope), residual


def varadhan_distance(
    times: np.ndarray,
    values: np.ndarray,
    diag_x: np.ndarray | None = None,
    diag_y: np.ndarray | None = None,
    t_floor: float = 0.0,
    window_points: int = WINDOW_POINTS,
) -> VaradhanFit:
    """d̂(x, y) from samples of p(x, y, t) on a small-t grid.

    Windows of ``window_points`` consecutive samples with t ≥ t_floor and a
    normalized kernel above 1e−10 are fitted; the one with the smallest RMS
    residual wins. Without an admissible window, the fit shrinks to the
    valid samples and is flagged.
    """
    y = varadhan_exponent(times, values, diag_x, diag_y)
    ratio = values
    if diag_x is not None and diag_y is not None:
        ratio = values / np.sqrt(diag_x * diag_y)
    valid = (times >= t_floor) & (ratio >= MIN_RATIO) & np.isfinite(y)

    best: VaradhanFit | None = None
    size = min(window_points, int(np.count_nonzero(valid)))
    if size >= MIN_WINDOW_POINTS:
        for start in range(times.size - size + 1):
            window = slice(start, start + size)
            if not np.all(valid[window]):
                continue
            intercept, slope, residual = _linear_fit(times[window], y[window])
            if best is None or residual < best.residual:
                best = VaradhanFit(
                    distance=float(np.sqrt(max(intercept, 0.0))),
                    intercept=intercept,
                    slope=slope,
                    window=(float(times[start]), float(times[start + size - 1])),
                    residual=residual,
                )
    if best is not None:
        return best

    usable = np.flatnonzero(valid)
    if usable.size >= 2:
        intercept, slope, residual = _linear_fit(times[usable], y[usable])
        window_bounds = (float(times[usable[0]]), float(times[usable[-1]]))
    else:
        intercept, slope, residual = float("nan"), float("nan"), float("inf")
        window_bounds = (float("nan"), float("nan"))
    logger.warning("varadhan_fit_flagged", valid_points=int(usable.size))
    return VaradhanFit(
        distance=float(np.sqrt(max(intercept, 0.0))) if np.isfinite(intercept) else float("nan"),
        intercept=intercept,
        slope=slope,
        window=window_bounds,
        residual=residual,
        flagged=True,
    )


@dataclass(frozen=True, eq=False)
class VaradhanMatrix:
    """Pairwise Varadhan fits.

    Attributes:
        distance: d̂, symmetric with zero diagonal
        intercept: Fitted y(0) per pair
        slope: Fitted dy/dt per pair
        residual: RMS residual per pair
        window_start: Start time of the chosen window per pair
        flagged: Pairs without an admissible window
    """

    distance: np.ndarray
    intercept: np.ndarray
    slope: np.ndarray
    residual: np.ndarray
    window_start: np.ndarray
    flagged: np.ndarray


def varadhan_matrix(
    times: np.ndarray,
    kernels: np.ndarray,
    t_floor: float = 0.0,
    window_points: int = WINDOW_POINTS,
) -> VaradhanMatrix:
    """Vectorized diagonally normalized Varadhan fits for every pair.

    Args:
        times: Increasing times, shape (T,)
        kernels: p on the point set, shape (T, P, P); symmetrized first
        t_floor: Discretization floor
        window_points: Window length in samples

    Returns:
        VaradhanMatrix
    """
    kernels = 0.5 * (kernels + np.swapaxes(kernels, 1, 2))
    diag = np.diagonal(kernels, axis1=1, axis2=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_diag = np.log(diag)
        log_k = np.log(kernels)
        normalized = log_k - 0.5 * log_diag[:, :, None] - 0.5 * log_diag[:, None, :]
        y = -4.0 * times[:, None, None] * normalized
        ratio = np.exp(normalized)
    valid = (times[:, None, None] >= t_floor) & (ratio >= MIN_RATIO) & np.isfinite(y)

    count = kernels.shape[1]
    best_residual = np.full((count, count), np.inf)
    best_intercept = np.full((count, count), np.nan)
    best_slope = np.full((count, count), np.nan)
    best_start = np.full((count, count), np.nan)
    size = min(window_points, times.size)
    for start in range(times.size - size + 1):
        t = times[start : start + size]
        block = y[start : start + size]
        ok = np.all(valid[start : start + size], axis=0)
        if not np.any(ok):
            continue
        t_mean = t.mean()
        t_centred = t - t_mean
        denom = float(np.sum(t_centred**2))
        safe = np.where(ok[None], block, 0.0)
        y_mean = safe.mean(axis=0)
        slope = np.tensordot(t_centred, safe, axes=(0, 0)) / denom
        intercept = y_mean - slope * t_mean
        fitted = intercept[None] + slope[None] * t[:, None, None]
        residual = np.sqrt(np.mean((fitted - safe) ** 2, axis=0))
        better = ok & (residual < best_residual)
        best_residual = np.where(better, residual, best_residual)
        best_intercept = np.where(better, intercept, best_intercept)
        best_slope = np.where(better, slope, best_slope)
        best_start = np.where(better, t[0], best_start)

    flagged = ~np.isfinite(best_residual)
    distance = np.sqrt(np.clip(best_intercept, 0.0, None))
    distance = 0.5 * (distance + distance.T)
    np.fill_diagonal(distance, 0.0)
    np.fill_diagonal(flagged, False)
    if np.any(flagged):
        logger.warning("varadhan_pairs_flagged", pairs=int(np.count_nonzero(np.triu(flagged))))
    return VaradhanMatrix(
        distance=distance,
        intercept=best_intercept,
        slope=best_slope,
        residual=best_residual,
        window_start=best_start,
        flagged=flagged,
    )
