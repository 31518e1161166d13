"""Spectral Galerkin wave solver and the source-to-coefficient map."""

from collections.abc import Sequence

import numpy as np

from tiresias.errors import WaveProblemError
from tiresias.spectral.models import SpectralData
from tiresias.utils.logging import get_logger
from tiresias.wave.kernels import piecewise_linear_duhamel
from tiresias.wave.models import TimeSource, WaveProblem, WaveSolution, WindowModes

logger = get_logger(__name__, component="WaveSolver")


def _project(spectrum: SpectralData, values: np.ndarray) -> np.ndarray:
    """⟨v, φ_j⟩_m for every mode (v may be batched along axis 0)."""
    weighted = values * spectrum.measure
    result: np.ndarray = weighted @ spectrum.eigenfunctions.T
    return result


def solve_wave(problem: WaveProblem, cache_size: int = 256) -> WaveSolution:
    """Solve the wave equation mode by mode in closed form.

    Args:
        problem: Wave problem on a space with known spectral data
        cache_size: Number of evaluation times memoised by the solution

    Returns:
        WaveSolution

    Raises:
        WaveProblemError: If the spectrum is truncated without a declared tail
    """
    spectrum = problem.spectrum
    if not spectrum.is_complete and not spectrum.tail_declared:
        raise WaveProblemError(
            "truncated spectrum without a declared tail",
            details={"modes": spectrum.mode_cutoff, "vertices": spectrum.vertex_count},
        )

    source = problem.source
    if source.is_zero:
        nodes = np.zeros(0)
        source_coefficients = np.zeros((0, spectrum.mode_cutoff))
    else:
        nodes = source.nodes
        source_coefficients = _project(spectrum, source.dense(spectrum.vertex_count))

    solution = WaveSolution(
        spectrum=spectrum,
        displacement_coefficients=_project(spectrum, problem.initial_displacement),
        velocity_coefficients=_project(spectrum, problem.initial_velocity),
        source_nodes=nodes,
        source_coefficients=source_coefficients,
        horizon=problem.horizon,
        source=source,
        cache_size=cache_size,
    )
    logger.debug(
        "wave_solved",
        space=spectrum.space_name,
        modes=spectrum.mode_cutoff,
        source_nodes=int(nodes.size),
        horizon=problem.horizon,
    )
    return solution


def source_to_coefficients(modes: WindowModes, source: TimeSource, t: float) -> np.ndarray:
    """Fourier coefficients u^f_j(t) of the wave launched by f from rest.

    u^f_j(t) = ∫_0^t ∫_V s_j(t − τ) f(·, τ) φ_j dm dτ, computed from the window
    data alone.

    Args:
        modes: Eigenvalues with eigenfunctions and measure on the window V
        source: Source whose support lies in V
        t: Evaluation time (≥ 0)

    Returns:
        Coefficients, shape (J,)

    Raises:
        WaveProblemError: If the source support leaves V
    """
    if t < 0:
        raise WaveProblemError("evaluation time must be nonnegative", details={"t": t})
    lam = np.asarray(modes.eigenvalues, dtype=float)
    if source.is_zero:
        return np.zeros(lam.shape)

    position = {int(v): i for i, v in enumerate(modes.vertices)}
    columns = []
    for vertex in source.support:
        if int(vertex) not in position:
            raise WaveProblemError(
                "source support leaves the window", details={"vertex": int(vertex)}
            )
        columns.append(position[int(vertex)])

    index = np.asarray(columns, dtype=np.int64)
    weighted_modes = modes.eigenfunctions[:, index] * modes.measure_on_V[index][None, :]
    projected = source.values @ weighted_modes.T
    return piecewise_linear_duhamel(lam, source.nodes, projected, t, order=1)


def energy_constant(solution: WaveSolution, times: Sequence[float] | np.ndarray) -> float:
    """Empirical C(T) in sup_t ‖u(t)‖_{H¹} ≤ C(T)(‖f‖ + ‖ψ_0‖_{H¹} + ‖ψ_1‖).

    Returns 0 for trivial data.
    """
    lam = solution.spectrum.eigenvalues
    psi0 = solution.displacement_coefficients
    psi1 = solution.velocity_coefficients
    data_norm = (
        np.sqrt(solution.source.squared_norm(solution.spectrum.measure))
        + np.sqrt(np.sum((1.0 + lam) * psi0 * psi0))
        + np.sqrt(np.sum(psi1 * psi1))
    )
    if data_norm == 0:
        return 0.0
    peak = max(solution.h1_norm(float(t)) for t in times)
    constant = float(peak / data_norm)
    logger.debug("energy_constant", constant=constant, samples=len(times))
    return constant
