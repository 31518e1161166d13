"""Heat trace on the window, total mass and eigenvalue peeling.

The exact t → ∞ limits of the extraction become finite-window fits: the
limit of I_0 is Richardson-extrapolated in e^{−λ̂_1 t}, and each decay rate
is fitted on the largest-t decade where the remainder clears the noise floor,
then all rates are polished jointly. A last polish runs where every rate
beyond the peeled ones has decayed below roundoff.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from tiresias.errors import IllPosedDataError
from tiresias.spectral.eigen import cluster_eigenvalues
from tiresias.spectral.models import ObservationWindow
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="TraceExtractor")

LOG_RANGE_GUARD = 36.0
FLOOR_MARGIN = 1e3
ROUNDOFF_FACTOR = 4.0
MIN_WINDOW_POINTS = 4
RELATIVE_WEIGHT = 1e-6


def heat_trace_on_V(obs: ObservationWindow) -> np.ndarray:
    """I_0(t) = Σ_{x∈V} m_x p(x, x, t) on the observation grid."""
    result: np.ndarray = obs.diagonal() @ obs.measure_on_V
    return result


def noise_floor(values: np.ndarray, noise_level: float = 0.0) -> np.ndarray:
    """Per-sample absolute uncertainty: roundoff plus relative observation noise."""
    roundoff = ROUNDOFF_FACTOR * np.finfo(float).eps * float(np.max(np.abs(values)))
    return roundoff + noise_level * np.abs(values)


def _log_linear_rate(times: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(times, np.log(values), 1)
    return float(-slope), float(np.exp(intercept))


def _pilot_rate(times: np.ndarray, trace: np.ndarray, floor: np.ndarray) -> float | None:
    """Decay rate of −dI_0/dt over its largest-t decade above the floor."""
    derivative = -np.gradient(trace, times)
    usable = derivative > FLOOR_MARGIN * floor / np.maximum(np.gradient(times), 1e-300)
    if np.count_nonzero(usable) < MIN_WINDOW_POINTS:
        return None
    t_end = times[usable][-1]
    window = usable & (times >= t_end / 10.0)
    if np.count_nonzero(window) < 2:
        return None
    rate, _ = _log_linear_rate(times[window], derivative[window])
    return rate if rate > 0 else None


@dataclass(frozen=True)
class MassEstimate:
    """Recovered total mass and constant mode.

    Attributes:
        mass: m(X)_rec
        phi0: φ_0 = m(X)_rec^{-1/2}
        limit: Estimated lim I_0(t)
        pilot_rate: Decay rate used for the extrapolation (None if unavailable)
        method: ``"richardson"`` or ``"plateau"``
    """

    mass: float
    phi0: float
    limit: float
    pilot_rate: float | None
    method: str


def recover_mass_and_phi0(obs: ObservationWindow) -> MassEstimate:
    """Recover m(X) from the long-time limit of the window trace.

    lim I_0 = m(V)·φ_0², so φ_0 = (lim I_0 / m(V))^{1/2} and m(X) = φ_0^{−2}.
    When e^{−λ̂_1 t_max} is below the log-range guard the last sample is the
    limit; otherwise the last two samples are Richardson-extrapolated.

    Raises:
        IllPosedDataError: If the limit estimate is not positive
    """
    times = obs.t_grid
    trace = heat_trace_on_V(obs)
    floor = noise_floor(trace, obs.noise_level)
    rate = _pilot_rate(times, trace, floor)

    if rate is None or rate * times[-1] > LOG_RANGE_GUARD or times.size < 2:
        limit = float(trace[-1])
        method = "plateau"
    else:
        ratio = np.exp(-rate * (times[-1] - times[-2]))
        limit = float((trace[-1] - ratio * trace[-2]) / (1.0 - ratio))
        method = "richardson"
        if rate * times[-1] < 20.0:
            logger.warning("trace_tail_short", pilot_rate=rate, t_max=float(times[-1]))

    if not limit > 0:
        logger.error("mass_limit_not_positive", limit=limit)
        raise IllPosedDataError(
            "non-positive limit of the window heat trace",
            details={"limit": limit, "method": method},
        )

    phi0 = float(np.sqrt(limit / obs.window_mass))
    mass = 1.0 / phi0**2
    logger.info("mass_recovered", mass=mass, phi0=phi0, method=method, pilot_rate=rate)
    return MassEstimate(mass=mass, phi0=phi0, limit=limit, pilot_rate=rate, method=method)


@dataclass
class PeelResult:
    """Decay rates and amplitudes recovered by peeling.

    Attributes:
        rates: Recovered decay rates, ascending
        amplitudes: Amplitude of each rate
        windows: (t_start, t_end) of each component's fit window
        partial: Whether fewer components than requested were resolved
        diagnostic: Why peeling stopped early
        clean_start: Start of the region refit by :func:`refine_on_clean_region`
        offset: Correction to the limit found by that refit
    """

    rates: np.ndarray
    amplitudes: np.ndarray
    windows: list[tuple[float, float]] = field(default_factory=list)
    partial: bool = False
    diagnostic: str | None = None
    clean_start: float | None = None
    offset: float = 0.0

    @property
    def achieved(self) -> int:
        """Number of resolved components."""
        return int(self.rates.size)

    @property
    def fit_start(self) -> float:
        """Start of the window of the last resolved component."""
        return self.windows[-1][0] if self.windows else 0.0

    @property
    def model_start(self) -> float:
        """First time from which the components describe the data to roundoff."""
        return self.clean_start if self.clean_start is not None else self.fit_start


def _model(params: np.ndarray, times: np.ndarray, count: int) -> np.ndarray:
    rates = np.exp(params[:count])
    amplitudes = params[count:]
    result: np.ndarray = np.exp(-np.outer(times, rates)) @ amplitudes
    return result


def _polish(
    times: np.ndarray,
    remainder: np.ndarray,
    weights: np.ndarray,
    rates: np.ndarray,
    amplitudes: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    count = rates.size
    start = np.concatenate([np.log(rates), amplitudes])

    def residuals(params: np.ndarray) -> np.ndarray:
        return (_model(params, times, count) - remainder) * weights

    result = least_squares(residuals, start, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    params = result.x if result.success else start
    order = np.argsort(params[:count])
    return np.exp(params[:count])[order], params[count:][order]


def _polish_with_offset(
    times: np.ndarray,
    remainder: np.ndarray,
    weights: np.ndarray,
    rates: np.ndarray,
    amplitudes: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, float]:
    count = rates.size
    start = np.concatenate([np.log(rates), amplitudes, [0.0]])

    def residuals(params: np.ndarray) -> np.ndarray:
        return (_model(params[:-1], times, count) + params[-1] - remainder) * weights

    result = least_squares(
        residuals, start, method="lm", x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    params = result.x if result.success else start
    order = np.argsort(params[:count])
    return np.exp(params[:count])[order], params[count:-1][order], float(params[-1])


def peel_exponentials(
    times: np.ndarray,
    values: np.ndarray,
    limit: float,
    max_components: int,
    noise_level: float = 0.0,
    min_gap: float = 1e-8,
) -> PeelResult:
    """Resolve I(t) = limit + Σ_k A_k e^{−λ_k t} component by component.

    Each new rate is fitted log-linearly on the largest-t decade where the
    remainder exceeds 10³ times the noise floor; all components found so far
    are then refit jointly over t ≥ that window's start.

    Args:
        times: Increasing sample times
        values: Samples of I
        limit: Long-time limit of I
        max_components: Number of components to resolve
        noise_level: Relative observation noise
        min_gap: Minimal relative separation from the previous rate

    Returns:
        PeelResult, flagged partial if the floor is reached first
    """
    floor = noise_floor(values, noise_level)
    base = values - limit
    weights_all = 1.0 / (floor + RELATIVE_WEIGHT * np.abs(base))

    rates = np.zeros(0)
    amplitudes = np.zeros(0)
    windows: list[tuple[float, float]] = []
    diagnostic = None

    for _ in range(max_components):
        fitted = np.exp(-np.outer(times, rates)) @ amplitudes if rates.size else 0.0
        remainder = base - fitted
        usable = remainder > FLOOR_MARGIN * floor
        if np.count_nonzero(usable) < MIN_WINDOW_POINTS:
            diagnostic = "remainder below noise floor"
            break
        t_end = float(times[usable][-1])
        window = usable & (times >= t_end / 10.0)
        if np.count_nonzero(window) < MIN_WINDOW_POINTS:
            diagnostic = "fit window has fewer than 4 samples"
            break

        rate, amplitude = _log_linear_rate(times[window], remainder[window])
        if rate * float(times[window][0]) > LOG_RANGE_GUARD:
            diagnostic = "decay rate beyond the grid's dynamic range"
            break
        if rates.size and rate <= rates[-1] * (1.0 + min_gap):
            diagnostic = "new rate not separated from the previous one"
            break
        if rate <= 0:
            diagnostic = "non-decaying remainder"
            break

        t_start = float(times[window][0])
        rates = np.append(rates, rate)
        amplitudes = np.append(amplitudes, amplitude)
        region = times >= t_start
        rates, amplitudes = _polish(
            times[region], base[region], weights_all[region], rates, amplitudes
        )
        windows.append((t_start, t_end))
        logger.debug(
            "peel_component", index=int(rates.size), rate=float(rates[-1]), window=(t_start, t_end)
        )

    partial = rates.size < max_components
    if partial:
        logger.warning(
            "peeling_partial", achieved=int(rates.size), requested=max_components, reason=diagnostic
        )
    return PeelResult(
        rates=rates,
        amplitudes=amplitudes,
        windows=windows,
        partial=partial,
        diagnostic=diagnostic if partial else None,
    )


def refine_on_clean_region(
    times: np.ndarray,
    values: np.ndarray,
    limit: float,
    peel: PeelResult,
    noise_level: float = 0.0,
) -> PeelResult:
    """Refit the peeled components where nothing unmodelled is left above roundoff.

    With nonnegative weights and every unresolved rate above the last peeled
    one, the unresolved tail is at most (I(t_0) − limit)·e^{−λ_last (t − t_0)}.
    The clean region starts where that bound falls below the noise floor.
    Components still above the floor there are refit jointly with a free
    offset on the limit; the others keep their peeled values.

    Returns:
        The refined PeelResult, or ``peel`` unchanged when the region is too
        short for the fit
    """
    if peel.achieved < 2:
        return peel
    floor = noise_floor(values, noise_level)
    base = values - limit
    tail = abs(float(base[0])) * np.exp(-peel.rates[-1] * (times - times[0]))
    clean = np.flatnonzero(tail <= floor)
    if clean.size == 0:
        logger.debug("clean_region_empty", last_rate=float(peel.rates[-1]))
        return peel
    first = int(clean[0])
    region = times[first:]
    visible = np.abs(peel.amplitudes) * np.exp(-peel.rates * region[0]) > floor[first]
    count = int(np.count_nonzero(visible))
    if count == 0 or region.size < 2 * count + 1 + MIN_WINDOW_POINTS:
        logger.debug("clean_region_short", start=float(region[0]), samples=int(region.size))
        return peel

    weights = 1.0 / (floor[first:] + RELATIVE_WEIGHT * np.abs(base[first:]))
    rates = peel.rates.copy()
    amplitudes = peel.amplitudes.copy()
    rates[visible], amplitudes[visible], offset = _polish_with_offset(
        region, base[first:], weights, rates[visible], amplitudes[visible]
    )
    order = np.argsort(rates)
    logger.debug("clean_region_polish", start=float(region[0]), components=count, offset=offset)
    return replace(
        peel,
        rates=rates[order],
        amplitudes=amplitudes[order],
        clean_start=float(region[0]),
        offset=offset,
    )


@dataclass
class EigenvalueRecovery:
    """Clustered eigenvalues recovered from the window trace.

    Attributes:
        rates: One eigenvalue per cluster, ascending, λ_0 = 0 first
        amplitudes: Σ_{k∈cluster} ∫_V φ_k² dm per cluster
        clusters: Index groups after merging by ``gap_tol``
        requested: Number of non-constant clusters requested
        peel: Raw peeling result (including guard components)
    """

    rates: np.ndarray
    amplitudes: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    requested: int
    peel: PeelResult

    @property
    def achieved(self) -> int:
        """Non-constant clusters resolved."""
        return int(self.rates.size) - 1

    @property
    def partial(self) -> bool:
        """Whether fewer clusters than requested were resolved."""
        return self.achieved < self.requested

    @property
    def diagnostic(self) -> str | None:
        """Reason for a partial result."""
        return self.peel.diagnostic if self.partial else None


def recover_eigenvalues(
    obs: ObservationWindow,
    mass_rec: float,
    j_target: int,
    guard_components: int = 2,
    gap_tol: float | None = None,
) -> EigenvalueRecovery:
    """Recover the first ``j_target`` non-constant eigenvalue clusters.

    ``guard_components`` extra components are peeled so that the joint
    polish of the requested ones is not biased by the next rates; once one
    is found, everything is refit on the clean region. Guards are dropped
    from the result.

    Args:
        obs: Observation window
        mass_rec: Recovered m(X)
        j_target: Number of non-constant clusters wanted
        guard_components: Additional components peeled and discarded
        gap_tol: Merge threshold for numerically equal rates

    Returns:
        EigenvalueRecovery with λ_0 = 0 prepended
    """
    times = obs.t_grid
    trace = heat_trace_on_V(obs)
    limit = obs.window_mass / mass_rec
    peel = peel_exponentials(
        times,
        trace,
        limit,
        max_components=j_target + guard_components,
        noise_level=obs.noise_level,
    )
    if peel.achieved > j_target:
        peel = refine_on_clean_region(times, trace, limit, peel, obs.noise_level)
    kept = min(j_target, peel.achieved)
    rates = np.concatenate([[0.0], peel.rates[:kept]])
    amplitudes = np.concatenate([[limit], peel.amplitudes[:kept]])

    tol = gap_tol if gap_tol is not None else 1e-6 * (float(rates[-1]) + 1.0)
    clusters = cluster_eigenvalues(rates, tol)
    if any(len(c) > 1 for c in clusters):
        merged_rates = np.array([rates[list(c)].mean() for c in clusters])
        merged_amplitudes = np.array([amplitudes[list(c)].sum() for c in clusters])
        rates, amplitudes = merged_rates, merged_amplitudes
        clusters = tuple((i,) for i in range(rates.size))

    recovery = EigenvalueRecovery(
        rates=rates,
        amplitudes=amplitudes,
        clusters=clusters,
        requested=j_target,
        peel=peel,
    )
    logger.info(
        "eigenvalues_recovered",
        requested=j_target,
        achieved=recovery.achieved,
        rates=[float(r) for r in rates[1:]],
    )
    return recovery
