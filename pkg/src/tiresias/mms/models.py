"""Domain models for discrete metric-measure spaces."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from tiresias.mms.metric import graph_distances


def _frozen(array: np.ndarray, dtype: type = float) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpaceMetadata:
    """User-declared structure constants of a space.

    Attributes:
        curvature_bound: Lower Ricci bound K
        dimension_bound: Upper dimension bound N
        essential_dimension: Essential dimension n
        diameter: Diameter D
    """

    curvature_bound: float = 0.0
    dimension_bound: float = 1.0
    essential_dimension: int = 1
    diameter: float = 0.0

    def __post_init__(self) -> None:
        if self.dimension_bound < 1:
            raise ValueError(f"dimension_bound must be >= 1, got {self.dimension_bound}")
        if self.essential_dimension < 1:
            raise ValueError(f"essential_dimension must be >= 1, got {self.essential_dimension}")
        if self.diameter < 0:
            raise ValueError(f"diameter must be non-negative, got {self.diameter}")


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    """Weighted graph with lumped measure and an m-self-adjoint Laplacian.

    The Laplacian is assembled from edge conductances c_ij and the measure:
    the stiffness matrix W has W_ij = -c_ij off the diagonal and zero row sums,
    and L = M^{-1} W. Edge lengths only define the metric.

    Attributes:
        name: Short identifier (e.g. ``"circle-128"``)
        measure: Per-vertex masses m_i > 0
        edges: Integer array (E, 2) with i < j
        lengths: Edge lengths
        conductances: Edge conductances used by the Laplacian
        distance: Shortest-path distance matrix
        metadata: Declared structure constants
        coordinates: Optional embedding coordinates used for validation and plots
    """

    name: str
    measure: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    conductances: np.ndarray
    distance: np.ndarray
    metadata: SpaceMetadata
    coordinates: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        n = self.measure.shape[0]
        if n < 1:
            raise ValueError("space must have at least one vertex")
        if np.any(self.measure <= 0) or not np.all(np.isfinite(self.measure)):
            raise ValueError("measure must be positive and finite")
        if self.edges.ndim != 2 or self.edges.shape[1] != 2:
            raise ValueError(f"edges must have shape (E, 2), got {self.edges.shape}")
        if self.lengths.shape != (self.edges.shape[0],):
            raise ValueError("lengths must match edges")
        if self.conductances.shape != (self.edges.shape[0],):
            raise ValueError("conductances must match edges")
        if np.any(self.lengths <= 0) or np.any(self.conductances <= 0):
            raise ValueError("edge lengths and conductances must be positive")
        if self.distance.shape != (n, n):
            raise ValueError(f"distance must have shape ({n}, {n})")

    @classmethod
    def from_edges(
        cls,
        name: str,
        measure: np.ndarray,
        edges: np.ndarray,
        lengths: np.ndarray,
        conductances: np.ndarray | None = None,
        metadata: SpaceMetadata | None = None,
        coordinates: np.ndarray | None = None,
    ) -> "DiscreteSpace":
        """Build a space from an edge list, computing the shortest-path metric.

        Conductances default to inverse edge lengths. A metadata diameter of 0
        is replaced by the diameter of the computed metric.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        edges = np.sort(edges, axis=1)
        lengths = np.asarray(lengths, dtype=float)
        if conductances is None:
            conductances = 1.0 / lengths
        measure = np.asarray(measure, dtype=float)

        distance = graph_distances(measure.shape[0], edges, lengths)
        metadata = metadata or SpaceMetadata()
        if metadata.diameter == 0.0:
            metadata = SpaceMetadata(
                curvature_bound=metadata.curvature_bound,
                dimension_bound=metadata.dimension_bound,
                essential_dimension=metadata.essential_dimension,
                diameter=float(distance.max()),
            )

        return cls(
            name=name,
            measure=_frozen(measure),
            edges=_frozen(edges, dtype=np.int64),
            lengths=_frozen(lengths),
            conductances=_frozen(np.asarray(conductances, dtype=float)),
            distance=_frozen(distance),
            metadata=metadata,
            coordinates=None if coordinates is None else _frozen(coordinates),
        )

    @property
    def vertex_count(self) -> int:
        """Number of vertices."""
        return int(self.measure.shape[0])

    @property
    def total_mass(self) -> float:
        """m(X)."""
        return float(np.sum(self.measure))

    @property
    def min_edge_length(self) -> float:
        """Mesh size h used by discretization-floor rules."""
        return float(np.min(self.lengths))

    @cached_property
    def stiffness(self) -> np.ndarray:
        """Symmetric stiffness matrix W with zero row sums."""
        n = self.vertex_count
        w = np.zeros((n, n))
        i, j = self.edges[:, 0], self.edges[:, 1]
        np.add.at(w, (i, j), -self.conductances)
        np.add.at(w, (j, i), -self.conductances)
        np.fill_diagonal(w, -np.sum(w, axis=1))
        w.setflags(write=False)
        return w

    @cached_property
    def laplacian(self) -> np.ndarray:
        """L = M^{-1} W, the discrete stand-in for -Δ."""
        lap = self.stiffness / self.measure[:, None]
        off_diagonal = lap - np.diag(np.diag(lap))
        np.fill_diagonal(lap, -np.sum(off_diagonal, axis=1))
        lap.setflags(write=False)
        return lap

    def symmetry_residual(self) -> float:
        """max |m_i L_ij - m_j L_ji|."""
        weighted = self.measure[:, None] * self.laplacian
        return float(np.max(np.abs(weighted - weighted.T)))

    def constant_residual(self) -> float:
        """max |(L·1)_i|."""
        return float(np.max(np.abs(self.laplacian @ np.ones(self.vertex_count))))

    def min_symmetrized_eigenvalue(self) -> float:
        """Smallest eigenvalue of M^{-1/2} W M^{-1/2}."""
        scale = 1.0 / np.sqrt(self.measure)
        symmetric = self.stiffness * scale[:, None] * scale[None, :]
        return float(np.linalg.eigvalsh(symmetric)[0])

    def neighbours(self, vertex: int) -> np.ndarray:
        """Vertices sharing an edge with ``vertex``."""
        mask_i = self.edges[:, 0] == vertex
        mask_j = self.edges[:, 1] == vertex
        return np.concatenate([self.edges[mask_i, 1], self.edges[mask_j, 0]])
