"""Domain models for wave problems and their modal solutions."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Protocol

import numpy as np
import pandas as pd
from cachetools import LRUCache, cachedmethod

from tiresias.spectral.models import SpectralData
from tiresias.wave.kernels import duhamel_kernel, piecewise_linear_duhamel

UNIFORM_GRID_RTOL = 1e-9


class WindowModes(Protocol):
    """Spectral data restricted to an observation window.

    The Boundary Control map is typed against this protocol so that it can
    only see {λ_j, φ_j|_V, m|_V}, never a full space.
    """

    @property
    def vertices(self) -> np.ndarray: ...

    @property
    def eigenvalues(self) -> np.ndarray: ...

    @property
    def eigenfunctions(self) -> np.ndarray: ...

    @property
    def measure_on_V(self) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class TimeSource:
    """Source f(x, τ), piecewise linear in τ on a uniform grid.

    Attributes:
        support: Declared spatial support (vertex ids), shape (S,)
        nodes: Uniform time nodes, shape (K,)
        values: f at (node, support vertex), shape (K, S); zero elsewhere
    """

    support: np.ndarray
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.support.ndim != 1 or self.nodes.ndim != 1:
            raise ValueError("support and nodes must be one-dimensional")
        if self.values.shape != (self.nodes.shape[0], self.support.shape[0]):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({self.nodes.shape[0]}, {self.support.shape[0]})"
            )
        if np.unique(self.support).size != self.support.size:
            raise ValueError("support vertices must be distinct")
        if self.nodes.size and self.nodes[0] < 0:
            raise ValueError("source nodes must start at t >= 0")
        if self.nodes.size > 1:
            steps = np.diff(self.nodes)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=UNIFORM_GRID_RTOL):
                raise ValueError("source nodes must form a uniform increasing grid")

    @classmethod
    def zero(cls) -> "TimeSource":
        """The source f = 0."""
        return cls(
            support=np.zeros(0, dtype=np.int64),
            nodes=np.zeros(0),
            values=np.zeros((0, 0)),
        )

    @classmethod
    def from_function(
        cls,
        support: Sequence[int] | np.ndarray,
        nodes: np.ndarray,
        profile: Callable[[float], np.ndarray],
    ) -> "TimeSource":
        """Sample ``profile(τ)`` (values on the support) at every node."""
        support_arr = np.asarray(support, dtype=np.int64)
        values = np.array([np.asarray(profile(float(tau)), dtype=float) for tau in nodes])
        return cls(support=support_arr, nodes=np.asarray(nodes, dtype=float), values=values)

    @property
    def is_zero(self) -> bool:
        """Whether the source vanishes identically."""
        return self.values.size == 0 or not np.any(self.values)

    @property
    def step(self) -> float:
        """Node spacing Δ (0 for fewer than two nodes)."""
        return float(self.nodes[1] - self.nodes[0]) if self.nodes.size > 1 else 0.0

    def dense(self, vertex_count: int) -> np.ndarray:
        """Values on every vertex, shape (K, n), zero off the support."""
        out = np.zeros((self.nodes.shape[0], vertex_count))
        out[:, self.support] = self.values
        return out

    def squared_norm(self, measure: np.ndarray) -> float:
        """‖f‖² in L²(X × [0, ∞)), exact for piecewise-linear time profiles."""
        if self.nodes.size < 2:
            return 0.0
        a, b = self.values[:-1], self.values[1:]
        per_piece = np.diff(self.nodes)[:, None] * (a * a + a * b + b * b) / 3.0
        return float(np.sum(per_piece * measure[self.support][None, :]))

    def after(self, start: float) -> "TimeSource":
        """The source restricted to τ ≥ start, re-timed so start becomes 0.

        ``start`` must be a node or lie outside the node range.
        """
        if self.nodes.size == 0 or start >= self.nodes[-1]:
            return TimeSource.zero()
        if start <= self.nodes[0]:
            return TimeSource(self.support, self.nodes - start, self.values)
        hits = np.flatnonzero(np.isclose(self.nodes, start, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise ValueError(f"restart time {start} is not a source node")
        k = int(hits[0])
        return TimeSource(self.support, self.nodes[k:] - self.nodes[k], self.values[k:])


@dataclass(frozen=True, eq=False)
class WaveProblem:
    """(∂_t² + L) u = f on X × [0, T] with initial data (ψ_0, ψ_1).

    Attributes:
        spectrum: Spectral reference of the space
        initial_displacement: ψ_0 on every vertex
        initial_velocity: ψ_1 on every vertex
        source: Piecewise-linear source with declared support
        horizon: T > 0
    """

    spectrum: SpectralData
    initial_displacement: np.ndarray
    initial_velocity: np.ndarray
    source: TimeSource
    horizon: float

    def __post_init__(self) -> None:
        n = self.spectrum.vertex_count
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.initial_displacement.shape != (n,) or self.initial_velocity.shape != (n,):
            raise ValueError(f"initial data must have shape ({n},)")
        if self.source.support.size and (
            self.source.support.min() < 0 or self.source.support.max() >= n
        ):
            raise ValueError("source support outside the vertex range")

    @classmethod
    def homogeneous(
        cls,
        spectrum: SpectralData,
        initial_displacement: np.ndarray | None = None,
        initial_velocity: np.ndarray | None = None,
        horizon: float = 1.0,
    ) -> "WaveProblem":
        """Source-free problem; missing initial data is zero."""
        n = spectrum.vertex_count
        return cls(
            spectrum=spectrum,
            initial_displacement=np.zeros(n)
            if initial_displacement is None
            else np.asarray(initial_displacement, dtype=float),
            initial_velocity=np.zeros(n)
            if initial_velocity is None
            else np.asarray(initial_velocity, dtype=float),
            source=TimeSource.zero(),
            horizon=horizon,
        )


class WaveSolution:
    """Closed-form modal solution u(x, t) = Σ_j u_j(t) φ_j(x).

    u_j(t) = ψ_{0,j} K_0(t) + ψ_{1,j} K_1(t) + ∫_0^t f_j(τ) K_1(t − τ) dτ,
    with the convolution exact for piecewise-linear f_j. Coefficient vectors
    are memoised per evaluation time.

    Attributes:
        spectrum: Spectral reference
        displacement_coefficients: ψ_{0,j} = ⟨ψ_0, φ_j⟩_m
        velocity_coefficients: ψ_{1,j} = ⟨ψ_1, φ_j⟩_m
        source_nodes: Time nodes of the source
        source_coefficients: f_j at the nodes, shape (K, J)
        horizon: T of the problem
    """

    def __init__(
        self,
        spectrum: SpectralData,
        displacement_coefficients: np.ndarray,
        velocity_coefficients: np.ndarray,
        source_nodes: np.ndarray,
        source_coefficients: np.ndarray,
        horizon: float,
        source: TimeSource | None = None,
        cache_size: int = 256,
    ) -> None:
        self.spectrum = spectrum
        self.displacement_coefficients = displacement_coefficients
        self.velocity_coefficients = velocity_coefficients
        self.source_nodes = source_nodes
        self.source_coefficients = source_coefficients
        self.horizon = horizon
        self.source = source or TimeSource.zero()
        self._cache: LRUCache[tuple[str, float], np.ndarray] = LRUCache(maxsize=cache_size)

    @property
    def has_source(self) -> bool:
        """Whether the source term contributes."""
        return self.source_nodes.size > 1 and bool(np.any(self.source_coefficients))

    def _check_time(self, t: float) -> None:
        if t < 0 and self.has_source:
            raise ValueError("negative times are only defined for source-free problems")

    @cachedmethod(lambda self: self._cache, key=lambda self, t: ("u", float(t)))
    def coefficients(self, t: float) -> np.ndarray:
        """u_j(t) for every mode, shape (J,)."""
        self._check_time(t)
        lam = self.spectrum.eigenvalues
        out = self.displacement_coefficients * duhamel_kernel(0, lam, t)
        out = out + self.velocity_coefficients * duhamel_kernel(1, lam, t)
        if self.has_source:
            out = out + piecewise_linear_duhamel(
                lam, self.source_nodes, self.source_coefficients, t, order=1
            )
        out.setflags(write=False)
        return out

    @cachedmethod(lambda self: self._cache, key=lambda self, t: ("du", float(t)))
    def velocities(self, t: float) -> np.ndarray:
        """u_j'(t) for every mode, shape (J,)."""
        self._check_time(t)
        lam = self.spectrum.eigenvalues
        # d/dt K_0 = −λ K_1
        out = -lam * self.displacement_coefficients * duhamel_kernel(1, lam, t)
        out = out + self.velocity_coefficients * duhamel_kernel(0, lam, t)
        if self.has_source:
            out = out + piecewise_linear_duhamel(
                lam, self.source_nodes, self.source_coefficients, t, order=0
            )
        out.setflags(write=False)
        return out

    def field(self, t: float) -> np.ndarray:
        """u(·, t) on every vertex."""
        result: np.ndarray = self.coefficients(t) @ self.spectrum.eigenfunctions
        return result

    def velocity_field(self, t: float) -> np.ndarray:
        """∂_t u(·, t) on every vertex."""
        result: np.ndarray = self.velocities(t) @ self.spectrum.eigenfunctions
        return result

    def energy(self, t: float) -> float:
        """E(t) = Σ_j (u_j'(t)² + λ_j u_j(t)²)."""
        u = self.coefficients(t)
        du = self.velocities(t)
        return float(np.sum(du * du + self.spectrum.eigenvalues * u * u))

    def h1_norm(self, t: float) -> float:
        """‖u(t)‖_{H^{1,2}} = (Σ_j (1 + λ_j) u_j(t)²)^{1/2}."""
        u = self.coefficients(t)
        return float(np.sqrt(np.sum((1.0 + self.spectrum.eigenvalues) * u * u)))

    def restart(self, start: float, horizon: float | None = None) -> WaveProblem:
        """Problem continuing this solution from (u(start), ∂_t u(start)).

        The new problem runs on [0, horizon] in shifted time; by default its
        horizon covers what remains of this one, or ``start`` if nothing does.
        """
        remaining = self.horizon - start
        new_horizon = horizon if horizon is not None else (remaining if remaining > 0 else start)
        return WaveProblem(
            spectrum=self.spectrum,
            initial_displacement=self.field(start),
            initial_velocity=self.velocity_field(start),
            source=self.source.after(start),
            horizon=new_horizon,
        )

    def snapshots(self, times: Sequence[float] | np.ndarray) -> pd.DataFrame:
        """Columnar (t, vertex, value) table of u at the given times."""
        n = self.spectrum.vertex_count
        frames = [
            pd.DataFrame({"t": float(t), "vertex": np.arange(n), "value": self.field(float(t))})
            for t in times
        ]
        if not frames:
            return pd.DataFrame(columns=["t", "vertex", "value"])
        return pd.concat(frames, ignore_index=True)
