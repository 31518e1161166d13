"""Heat-kernel synthesis, observation sampling and export.

The kernel is p(x, y, t) = Σ_j e^{-λ_j t} φ_j(x) φ_j(y), i.e. the density of
e^{-tL} with respect to m. Summation order is fixed (ascending modes) so
repeated evaluations are bit-identical.
"""

import math

import numpy as np
import pandas as pd

from tiresias.errors import SpectralError
from tiresias.mms.models import DiscreteSpace
from tiresias.spectral.models import ObservationWindow, SpectralData
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="HeatKernel")


def _check_time(t: float) -> None:
    if not t > 0:
        raise SpectralError("heat kernel needs t > 0", details={"t": t})


def heat_kernel(spec: SpectralData, x: int, y: int, t: float) -> float:
    """p(x, y, t) from the truncated eigen-expansion.

    The truncation error is bounded by ``spec.tail_bound(t)``.

    Raises:
        SpectralError: If t <= 0
    """
    _check_time(t)
    weights = np.exp(-spec.eigenvalues * t)
    return float(np.sum(weights * spec.eigenfunctions[:, x] * spec.eigenfunctions[:, y]))


def heat_kernel_matrix(
    spec: SpectralData,
    t: float,
    rows: np.ndarray | None = None,
    cols: np.ndarray | None = None,
) -> np.ndarray:
    """p(x, y, t) for x in ``rows`` and y in ``cols`` (default: all vertices)."""
    _check_time(t)
    phi = spec.eigenfunctions
    phi_rows = phi if rows is None else phi[:, rows]
    phi_cols = phi if cols is None else phi[:, cols]
    weights = np.exp(-spec.eigenvalues * t)
    kernel = (phi_rows * weights[:, None]).T @ phi_cols
    square = rows is None and cols is None
    if square or (rows is not None and cols is not None and np.array_equal(rows, cols)):
        kernel = 0.5 * (kernel + kernel.T)
    return kernel


def heat_kernel_stack(
    spec: SpectralData, times: np.ndarray, vertices: np.ndarray | None = None
) -> np.ndarray:
    """Symmetric kernels on ``vertices`` for every time, shape (T, k, k)."""
    return np.stack([heat_kernel_matrix(spec, float(t), vertices, vertices) for t in times])


def uniformized_heat_matrix(space: DiscreteSpace, t: float, terms: int = 24) -> np.ndarray:
    """p(·, ·, t) computed with nonnegative arithmetic only.

    e^{-τL} for a small step τ is summed by uniformization,
    e^{-cτ} Σ_k (cτ)^k/k! (I − L/c)^k with c ≥ max L_ii so every term is
    entrywise nonnegative, then squared up to t. Tiny off-diagonal values keep
    full relative accuracy, which the spectral sum cannot provide.
    """
    _check_time(t)
    lap = space.laplacian
    rate = float(np.max(np.diag(lap)))
    jump = np.eye(space.vertex_count) - lap / rate
    np.clip(jump, 0.0, None, out=jump)

    squarings = max(0, math.ceil(math.log2(max(rate * t, 1e-300))))
    step = t / 2**squarings
    scaled = rate * step

    term = np.eye(space.vertex_count)
    total = term.copy()
    for k in range(1, terms + 1):
        term = term @ jump * (scaled / k)
        total += term
    propagator = total * math.exp(-scaled)

    for _ in range(squarings):
        propagator = propagator @ propagator
    kernel = propagator / space.measure[None, :]
    return 0.5 * (kernel + kernel.T)


def geometric_grid(t_min: float, t_max: float, points_per_decade: int = 16) -> np.ndarray:
    """Geometric time grid with a fixed number of points per decade."""
    if not 0 < t_min < t_max:
        raise SpectralError("grid needs 0 < t_min < t_max", details={"t_min": t_min, "t_max": t_max})
    decades = math.log10(t_max / t_min)
    count = max(2, int(round(decades * points_per_decade)) + 1)
    return np.geomspace(t_min, t_max, count)


def sample_observation(
    spec: SpectralData,
    space: DiscreteSpace,
    window: np.ndarray,
    t_grid: np.ndarray,
    noise: float = 0.0,
    seed: int = 0,
) -> ObservationWindow:
    """Fill the observation table on V × V × t_grid.

    Args:
        spec: Spectral data of the observed space
        space: Observed space (for the measure and metric restricted to V)
        window: Vertex ids of V
        t_grid: Positive ascending times
        noise: Relative noise level σ; each symmetric entry is multiplied by
            (1 + σξ) with ξ standard normal
        seed: Seed of the noise generator

    Raises:
        SpectralError: If V is empty or the grid is invalid
    """
    window = np.asarray(window, dtype=np.int64)
    t_grid = np.asarray(t_grid, dtype=float)
    if window.size == 0:
        raise SpectralError("observation window is empty")
    if np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise SpectralError("t_grid must be positive and strictly increasing")

    samples = heat_kernel_stack(spec, t_grid, window)
    if noise > 0:
        rng = np.random.default_rng(seed)
        upper = np.triu(rng.standard_normal(samples.shape), k=0)
        xi = upper + np.swapaxes(np.triu(upper, k=1), 1, 2)
        samples = samples * (1.0 + noise * xi)

    logger.info(
        "observation_sampled",
        space=space.name,
        window=int(window.size),
        times=int(t_grid.size),
        noise=noise,
    )
    return ObservationWindow(
        space_name=space.name,
        vertices=window,
        t_grid=t_grid,
        heat_samples=samples,
        measure_on_V=space.measure[window].copy(),
        window_distance=space.distance[np.ix_(window, window)].copy(),
        mesh_size=space.min_edge_length,
        noise_level=noise,
    )


def export_observation(obs: ObservationWindow) -> pd.DataFrame:
    """Columnar (x, y, t, p) table with global vertex ids."""
    t_count, size, _ = obs.heat_samples.shape
    t_index, x_index, y_index = np.meshgrid(
        np.arange(t_count), np.arange(size), np.arange(size), indexing="ij"
    )
    return pd.DataFrame(
        {
            "x": obs.vertices[x_index.ravel()],
            "y": obs.vertices[y_index.ravel()],
            "t": obs.t_grid[t_index.ravel()],
            "p": obs.heat_samples.ravel(),
        }
    )


def semigroup_residual(spec: SpectralData, s: float, t: float) -> float:
    """max |Σ_z m_z p(x,z,s) p(z,y,t) − p(x,y,s+t)|."""
    left = heat_kernel_matrix(spec, s)
    right = heat_kernel_matrix(spec, t)
    composed = (left * spec.measure[None, :]) @ right
    return float(np.max(np.abs(composed - heat_kernel_matrix(spec, s + t))))


def stochastic_defect(spec: SpectralData, t: float) -> float:
    """max_y |Σ_x m_x p(x, y, t) − 1|."""
    kernel = heat_kernel_matrix(spec, t)
    return float(np.max(np.abs(spec.measure @ kernel - 1.0)))
