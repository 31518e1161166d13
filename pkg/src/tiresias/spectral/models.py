"""Domain models for spectral data and heat observations."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenpairs of the Laplacian, m-orthonormal and clustered.

    Attributes:
        eigenvalues: Ascending eigenvalues, shape (J,)
        eigenfunctions: Row j holds φ_j on every vertex, shape (J, n)
        measure: Vertex masses of the underlying space, shape (n,)
        clusters: Index groups of (numerically) equal eigenvalues
        gap_tol: Threshold used to split clusters
        tail_declared: Whether a truncated spectrum may be used where the
            full spectrum is normally required
        space_name: Name of the space the data came from
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    measure: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    gap_tol: float
    tail_declared: bool = False
    space_name: str = ""

    def __post_init__(self) -> None:
        if self.eigenfunctions.shape != (self.eigenvalues.shape[0], self.measure.shape[0]):
            raise ValueError(
                f"eigenfunctions shape {self.eigenfunctions.shape} does not match "
                f"({self.eigenvalues.shape[0]}, {self.measure.shape[0]})"
            )
        if self.gap_tol <= 0:
            raise ValueError("gap_tol must be positive")

    @property
    def mode_cutoff(self) -> int:
        """J_max, the number of stored modes."""
        return int(self.eigenvalues.shape[0])

    @property
    def vertex_count(self) -> int:
        """Number of vertices of the underlying space."""
        return int(self.measure.shape[0])

    @property
    def is_complete(self) -> bool:
        """Whether every mode of the space is stored."""
        return self.mode_cutoff == self.vertex_count

    @property
    def total_mass(self) -> float:
        """m(X)."""
        return float(np.sum(self.measure))

    def tail_bound(self, t: float) -> float:
        """Bound on the heat-kernel truncation error at time t.

        Uses |φ_j(x)|² ≤ 1/m_x for m-normalized eigenfunctions and λ_j ≥ λ_{J-1}
        for the missing modes.
        """
        missing = self.vertex_count - self.mode_cutoff
        if missing == 0:
            return 0.0
        return float(missing * np.exp(-self.eigenvalues[-1] * t) / np.min(self.measure))

    def cluster_sizes(self) -> list[int]:
        """Multiplicity of each cluster, in ascending eigenvalue order."""
        return [len(c) for c in self.clusters]


@dataclass(frozen=True, eq=False)
class ObservationWindow:
    """Heat kernel sampled on a vertex window: the data of the inverse problem.

    Attributes:
        space_name: Name of the observed space
        vertices: Global vertex ids of the window V
        t_grid: Strictly increasing positive times, shape (T,)
        heat_samples: p(x, y, t) with shape (T, |V|, |V|)
        measure_on_V: Restriction of the measure to V
        window_distance: Metric restricted to V
        mesh_size: Smallest edge length of the space (discretization scale)
        noise_level: Relative noise applied to the samples
    """

    space_name: str
    vertices: np.ndarray
    t_grid: np.ndarray
    heat_samples: np.ndarray
    measure_on_V: np.ndarray
    window_distance: np.ndarray
    mesh_size: float
    noise_level: float = 0.0
    metadata: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        size = self.vertices.shape[0]
        if size == 0:
            raise ValueError("observation window is empty")
        if np.any(self.t_grid <= 0) or np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be positive and strictly increasing")
        expected = (self.t_grid.shape[0], size, size)
        if self.heat_samples.shape != expected:
            raise ValueError(f"heat_samples shape {self.heat_samples.shape} != {expected}")
        if self.measure_on_V.shape != (size,):
            raise ValueError("measure_on_V must match the window")
        if not np.array_equal(self.heat_samples, np.swapaxes(self.heat_samples, 1, 2)):
            raise ValueError("heat_samples must be symmetric in (x, y)")
        diagonal = np.diagonal(self.heat_samples, axis1=1, axis2=2)
        if np.any(diagonal <= 0):
            raise ValueError("heat_samples must be positive on the diagonal")

    @property
    def size(self) -> int:
        """|V|."""
        return int(self.vertices.shape[0])

    @property
    def window_mass(self) -> float:
        """m(V)."""
        return float(np.sum(self.measure_on_V))

    def diagonal(self) -> np.ndarray:
        """p(x, x, t) with shape (T, |V|)."""
        return np.diagonal(self.heat_samples, axis1=1, axis2=2).copy()
