"""Density and dimension from the short-time diagonal of the heat kernel.

For an n-dimensional region with density ρ, t^{n/2} p(x, x, t) → κ_n/ρ(x)
as t → 0. The dimension is the n for which t^{n/2} p(x, x, t) stays flat in
log-log coordinates; ρ̂ is κ_n over the extrapolated plateau.
"""

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from tiresias.errors import DimensionAmbiguityError
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="DensityRecovery")

CANDIDATE_DIMENSIONS = (1, 2, 3)
AMBIGUITY_MARGIN = 0.1


def analytic_constant(n: int) -> float:
    """Euclidean value (4π)^{-n/2} of lim t^{n/2} p(x, x, t) at unit density."""
    return float((4.0 * math.pi) ** (-n / 2.0))


def _window(times: np.ndarray, t_floor: float, t_max: float | None) -> np.ndarray:
    mask = times >= t_floor
    if t_max is not None:
        mask &= times <= t_max
    return mask


@dataclass(frozen=True)
class PlateauFit:
    """Fit of t^{n/2} p(x, x, t) for one candidate dimension.

    Attributes:
        dimension: Candidate n
        slope: Slope of log(t^{n/2} p) against log t
        limit: Plateau extrapolated linearly in t to t = 0
    """

    dimension: int
    slope: float
    limit: float


def plateau_fit(times: np.ndarray, diag: np.ndarray, n: int) -> PlateauFit:
    """Fit the plateau of t^{n/2} p(x, x, t) on the given samples."""
    scaled = times ** (n / 2.0) * diag
    slope = float(np.polyfit(np.log(times), np.log(scaled), 1)[0])
    limit = float(np.polyfit(times, scaled, 1)[1])
    return PlateauFit(dimension=n, slope=slope, limit=limit)


@dataclass(frozen=True)
class DensityEstimate:
    """Recovered dimension and density at one point.

    Attributes:
        dimension: n̂
        density: ρ̂ = κ_n̂ / plateau
        fits: Plateau fit for every candidate dimension
    """

    dimension: int
    density: float
    fits: tuple[PlateauFit, ...]

    def slopes(self) -> dict[int, float]:
        """Log-log slope per candidate dimension."""
        return {f.dimension: f.slope for f in self.fits}


@dataclass(frozen=True)
class DensityCalibration:
    """κ_n calibrated on a uniform exemplar.

    Attributes:
        dimension: n
        constant: Calibrated κ_n (median over vertices)
        analytic: (4π)^{-n/2}
        spread: max/min − 1 of the per-vertex plateaus
        source: Name of the exemplar
    """

    dimension: int
    constant: float
    analytic: float
    spread: float
    source: str = ""

    @property
    def relative_gap(self) -> float:
        """|κ_n − (4π)^{-n/2}| / (4π)^{-n/2}, the universality check."""
        return abs(self.constant - self.analytic) / self.analytic


def calibrate_density_constant(
    times: np.ndarray,
    diag: np.ndarray,
    n: int,
    t_floor: float = 0.0,
    t_max: float | None = None,
    density: float = 1.0,
    source: str = "",
) -> DensityCalibration:
    """Calibrate κ_n from the diagonal of a uniform exemplar.

    Args:
        times: Time grid, shape (T,)
        diag: p(x, x, t) per vertex, shape (T, P)
        n: Dimension of the exemplar
        t_floor: Discretization floor
        t_max: Upper end of the fit window
        density: Known uniform density of the exemplar
        source: Exemplar name recorded in the calibration
    """
    mask = _window(times, t_floor, t_max)
    plateaus = np.array(
        [plateau_fit(times[mask], diag[mask, p], n).limit for p in range(diag.shape[1])]
    )
    calibration = DensityCalibration(
        dimension=n,
        constant=float(np.median(plateaus) * density),
        analytic=analytic_constant(n),
        spread=float(np.max(plateaus) / np.min(plateaus) - 1.0),
        source=source,
    )
    logger.info(
        "density_constant_calibrated",
        dimension=n,
        constant=calibration.constant,
        relative_gap=calibration.relative_gap,
        spread=calibration.spread,
        source=source,
    )
    return calibration


def _constant(n: int, calibration: Mapping[int, DensityCalibration] | None) -> float:
    if calibration is not None and n in calibration:
        return calibration[n].constant
    return analytic_constant(n)


def density_recovery(
    times: np.ndarray,
    diag: np.ndarray,
    dimensions: Sequence[int] = CANDIDATE_DIMENSIONS,
    calibration: Mapping[int, DensityCalibration] | None = None,
    t_floor: float = 0.0,
    t_max: float | None = None,
) -> DensityEstimate:
    """ρ̂(x) and n̂ from p(x, x, t) on a small-t grid.

    Args:
        times: Time grid, shape (T,)
        diag: p(x, x, t), shape (T,)
        dimensions: Candidate integer dimensions
        calibration: Calibrated κ_n per dimension (analytic value otherwise)
        t_floor: Discretization floor
        t_max: Upper end of the fit window

    Returns:
        DensityEstimate

    Raises:
        DimensionAmbiguityError: If the two flattest candidates are within
            0.1 in |slope| or no candidate has a positive finite plateau
    """
    mask = _window(times, t_floor, t_max)
    if np.count_nonzero(mask) < 3:
        raise DimensionAmbiguityError(
            "fewer than three samples in the density window",
            details={"t_floor": t_floor, "t_max": t_max},
        )
    fits = tuple(plateau_fit(times[mask], diag[mask], n) for n in dimensions)
    admissible = [f for f in fits if np.isfinite(f.limit) and f.limit > 0]
    ranked = sorted(admissible, key=lambda f: abs(f.slope))
    slopes = {f.dimension: f.slope for f in fits}
    if not ranked:
        raise DimensionAmbiguityError("no candidate dimension has a positive plateau", details=slopes)
    if len(ranked) > 1 and abs(ranked[1].slope) - abs(ranked[0].slope) < AMBIGUITY_MARGIN:
        raise DimensionAmbiguityError(
            "two candidate dimensions are equally flat",
            details={f"slope_{n}": s for n, s in slopes.items()},
        )
    best = ranked[0]
    return DensityEstimate(
        dimension=best.dimension,
        density=_constant(best.dimension, calibration) / best.limit,
        fits=fits,
    )


@dataclass(frozen=True, eq=False)
class DensityProfile:
    """Density recovery over a point set.

    Attributes:
        dimension: n̂ per point
        density: ρ̂ per point
        slopes: Log-log slope per point and candidate, shape (P, len(dimensions))
        dimensions: Candidate dimensions (column order of ``slopes``)
    """

    dimension: np.ndarray
    density: np.ndarray
    slopes: np.ndarray
    dimensions: tuple[int, ...]


def density_profile(
    times: np.ndarray,
    diag: np.ndarray,
    dimensions: Sequence[int] = CANDIDATE_DIMENSIONS,
    calibration: Mapping[int, DensityCalibration] | None = None,
    t_floor: float = 0.0,
    t_max: float | None = None,
) -> DensityProfile:
    """Run :func:`density_recovery` on every column of ``diag`` (shape (T, P)).

    Raises:
        DimensionAmbiguityError: Naming every ambiguous point
    """
    count = diag.shape[1]
    dimension = np.zeros(count, dtype=np.int64)
    density = np.full(count, np.nan)
    slopes = np.full((count, len(dimensions)), np.nan)
    ambiguous: list[int] = []
    for p in range(count):
        try:
            estimate = density_recovery(times, diag[:, p], dimensions, calibration, t_floor, t_max)
        except DimensionAmbiguityError:
            ambiguous.append(p)
            continue
        dimension[p] = estimate.dimension
        density[p] = estimate.density
        slopes[p] = [f.slope for f in estimate.fits]
    if ambiguous:
        logger.error("dimension_ambiguous", points=ambiguous[:20], count=len(ambiguous))
        raise DimensionAmbiguityError(
            "dimension selection is ambiguous",
            details={"points": ambiguous[:20], "count": len(ambiguous)},
        )
    return DensityProfile(
        dimension=dimension,
        density=density,
        slopes=slopes,
        dimensions=tuple(dimensions),
    )
