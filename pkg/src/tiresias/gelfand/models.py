"""Extracted spectral data on the observation window."""

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class ClusterConditioning:
    """Conditioning of one gauge-fixed cluster.

    Attributes:
        cluster: Cluster index (0 is the constant mode)
        eigenvalue: Recovered eigenvalue
        multiplicity: Numerical rank of the cluster kernel
        points: Window positions chosen by the pivoted selection
        min_singular: Smallest singular value of Q restricted to the points
        reconstruction_residual: max |Σ φφ − Q| after the gauge fix
        window_weight: ∫_V Σ_k φ_k² dm
    """

    cluster: int
    eigenvalue: float
    multiplicity: int
    points: tuple[int, ...]
    min_singular: float
    reconstruction_residual: float
    window_weight: float


@dataclass(frozen=True)
class ExtractionAudit:
    """Which inputs an extraction consumed.

    Attributes:
        consumed: Names of the inputs read
        ground_truth_access: Whether any full-space quantity was read
    """

    consumed: tuple[str, ...]
    ground_truth_access: bool = False


@dataclass(frozen=True, eq=False)
class ExtractedSpectrum:
    """Spectral data {λ_j, φ_j|_V} recovered from window data.

    Eigenfunction blocks of multi-dimensional clusters are determined only up
    to an orthogonal factor, so consumers must depend on them through
    gauge-invariant combinations.

    Attributes:
        space_name: Name of the observed space
        vertices: Global ids of V
        measure_on_V: m restricted to V
        window_distance: Metric restricted to V
        mesh_size: Discretization scale of the observed space
        mass: Recovered m(X)
        eigenvalues: One entry per mode (repeated within clusters), shape (J,)
        eigenfunctions: φ_j on V, shape (J, |V|)
        clusters: Mode index groups
        provenance: ``"heat"`` or ``"spectral-data"``
        audit: Consumed-input record
        conditioning: Per-cluster conditioning reports
        partial: Whether fewer modes than requested were recovered
        diagnostic: Reason for a partial result
        mass_error: Monte Carlo error bar of ``mass`` (if computed)
    """

    space_name: str
    vertices: np.ndarray
    measure_on_V: np.ndarray
    window_distance: np.ndarray
    mesh_size: float
    mass: float
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    provenance: str
    audit: ExtractionAudit
    conditioning: tuple[ClusterConditioning, ...] = ()
    partial: bool = False
    diagnostic: str | None = None
    mass_error: float | None = None
    metadata: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        size = self.vertices.shape[0]
        if self.eigenfunctions.shape != (self.eigenvalues.shape[0], size):
            raise ValueError(
                f"eigenfunctions shape {self.eigenfunctions.shape} does not match "
                f"({self.eigenvalues.shape[0]}, {size})"
            )
        if self.measure_on_V.shape != (size,):
            raise ValueError("measure_on_V must match the window")
        if self.mass <= 0:
            raise ValueError("recovered mass must be positive")
        covered = sorted(i for cluster in self.clusters for i in cluster)
        if covered != list(range(self.eigenvalues.shape[0])):
            raise ValueError("clusters must partition the mode indices")

    @property
    def phi0(self) -> float:
        """φ_0 = m(X)^{-1/2}."""
        return float(self.mass**-0.5)

    @property
    def mode_cutoff(self) -> int:
        """Number of recovered modes."""
        return int(self.eigenvalues.shape[0])

    @property
    def size(self) -> int:
        """|V|."""
        return int(self.vertices.shape[0])

    def cluster_kernel(self, cluster: int) -> np.ndarray:
        """Q_j(x, y) = Σ_{k∈cluster} φ_k(x) φ_k(y) on V × V (gauge-invariant)."""
        block = self.eigenfunctions[list(self.clusters[cluster])]
        result: np.ndarray = block.T @ block
        return result

    def window_weights(self) -> np.ndarray:
        """∫_V Σ_{k∈cluster} φ_k² dm per cluster."""
        squares = self.eigenfunctions**2 @ self.measure_on_V
        return np.array([float(np.sum(squares[list(c)])) for c in self.clusters])

    def heat_kernel(self, t: float) -> np.ndarray:
        """Σ_j e^{−λ_j t} φ_j(x) φ_j(y) on V × V."""
        weights = np.exp(-self.eigenvalues * t)
        result: np.ndarray = (self.eigenfunctions * weights[:, None]).T @ self.eigenfunctions
        return result

    def spectral_identity_residual(self, t_grid: np.ndarray, samples: np.ndarray) -> np.ndarray:
        """Per-time max relative deviation of the synthesized kernel from samples.

        Args:
            t_grid: Times, shape (T,)
            samples: Observed p on V × V, shape (T, |V|, |V|)
        """
        out = np.empty(t_grid.shape[0])
        for k, t in enumerate(t_grid):
            observed = samples[k]
            scale = float(np.max(np.abs(observed)))
            out[k] = float(np.max(np.abs(self.heat_kernel(float(t)) - observed))) / scale
        return out

    def with_eigenfunctions(self, eigenfunctions: np.ndarray) -> "ExtractedSpectrum":
        """Copy with replaced eigenfunction values (e.g. a gauge twist)."""
        return replace(self, eigenfunctions=eigenfunctions)
