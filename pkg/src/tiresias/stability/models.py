"""Domain models for vertex maps, approximation reports and ladders."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from tiresias.errors import StabilityError
from tiresias.mms.models import DiscreteSpace


@dataclass(frozen=True, eq=False)
class VertexMap:
    """Partial vertex map ψ: domain[i] ↦ image[i].

    Attributes:
        domain: Distinct vertex ids of the first space
        image: Vertex ids of the second space
    """

    domain: np.ndarray
    image: np.ndarray

    def __post_init__(self) -> None:
        if self.domain.ndim != 1 or self.domain.shape != self.image.shape:
            raise ValueError("domain and image must be 1-D arrays of equal length")
        if np.unique(self.domain).size != self.domain.size:
            raise ValueError("domain vertices must be distinct")

    @classmethod
    def identity(cls, vertices: Sequence[int] | np.ndarray) -> "VertexMap":
        """ψ(x) = x on ``vertices``."""
        ids = np.asarray(vertices, dtype=np.int64)
        return cls(domain=ids.copy(), image=ids.copy())

    @classmethod
    def from_permutation(cls, permutation: np.ndarray) -> "VertexMap":
        """ψ(i) = permutation[i] on every vertex (the relabeling map)."""
        perm = np.asarray(permutation, dtype=np.int64)
        return cls(domain=np.arange(perm.size), image=perm.copy())

    @property
    def size(self) -> int:
        """Number of mapped vertices."""
        return int(self.domain.shape[0])

    def apply(self, vertices: Sequence[int] | np.ndarray) -> np.ndarray:
        """Images of ``vertices``; every one must lie in the domain."""
        lookup = dict(zip(self.domain.tolist(), self.image.tolist(), strict=True))
        try:
            return np.array([lookup[int(v)] for v in vertices], dtype=np.int64)
        except KeyError as e:
            raise StabilityError("vertex outside the map domain", details={"vertex": e.args[0]}) from e

    def restrict(self, vertices: Sequence[int] | np.ndarray) -> "VertexMap":
        """ψ restricted to ``vertices`` (which must lie in the domain)."""
        ids = np.asarray(vertices, dtype=np.int64)
        return VertexMap(domain=ids.copy(), image=self.apply(ids))

    def validate(self, space_x: DiscreteSpace, space_y: DiscreteSpace) -> None:
        """Reject maps whose domain leaves X or whose image leaves Y.

        Raises:
            StabilityError: Naming the first offending vertex
        """
        outside_x = self.domain[(self.domain < 0) | (self.domain >= space_x.vertex_count)]
        if outside_x.size:
            raise StabilityError(
                "map domain outside the first space",
                details={"vertex": int(outside_x[0]), "space": space_x.name},
            )
        outside_y = self.image[(self.image < 0) | (self.image >= space_y.vertex_count)]
        if outside_y.size:
            raise StabilityError(
                "map image outside the second space",
                details={"vertex": int(outside_y[0]), "space": space_y.name},
            )


@dataclass(frozen=True, eq=False)
class ApproxReport:
    """Measured closeness of two spaces under a vertex map.

    Attributes:
        vertex_map: The map ψ
        heat_ratio_eps: Smallest self-consistent ε of the heat-ratio bound
        eigen_eps: Smallest self-consistent ε of the eigendata bound (inf on
            a structural defect)
        gh_distortion: max |d_Y(ψx, ψy) − d_X(x, y)|
        surjectivity_defect: max_y d_Y(y, image ψ)
        structural_defect: Whether the cluster multiplicities differ
    """

    vertex_map: VertexMap
    heat_ratio_eps: float
    eigen_eps: float
    gh_distortion: float
    surjectivity_defect: float
    structural_defect: bool = False

    def __post_init__(self) -> None:
        values = (self.heat_ratio_eps, self.eigen_eps, self.gh_distortion, self.surjectivity_defect)
        if any(v < 0 for v in values):
            raise ValueError("approximation measures must be nonnegative")

    def to_dict(self) -> dict[str, float | bool | int]:
        """Scalar fields for artifacts."""
        return {
            "mapped_vertices": self.vertex_map.size,
            "heat_ratio_eps": self.heat_ratio_eps,
            "eigen_eps": self.eigen_eps,
            "gh_distortion": self.gh_distortion,
            "surjectivity_defect": self.surjectivity_defect,
            "structural_defect": self.structural_defect,
        }


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    """Map extended from the window to every recovered point.

    Attributes:
        extended: Ψ on the recovered vertex set
        report: ApproxReport of Ψ
        ambiguous: Domain vertices whose profile matched two targets
        uniqueness_gap: max d_Y(Ψx, Ψ'x) against a run on a perturbed net
        resolution: Lattice resolution the gap is judged against
    """

    extended: VertexMap
    report: ApproxReport
    ambiguous: tuple[int, ...] = ()
    uniqueness_gap: float | None = None
    resolution: float = 0.0

    @property
    def almost_unique(self) -> bool | None:
        """Whether the perturbed-net run stayed within the lattice resolution."""
        if self.uniqueness_gap is None:
            return None
        return self.uniqueness_gap <= self.resolution


@dataclass(eq=False)
class StabilityLadder:
    """Measured ε values and distortion across perturbation magnitudes."""

    magnitudes: list[float] = field(default_factory=list)
    heat_ratio_eps: list[float] = field(default_factory=list)
    eigen_eps: list[float] = field(default_factory=list)
    distortion: list[float] = field(default_factory=list)

    def add(self, magnitude: float, report: ApproxReport, distortion: float) -> None:
        """Append one rung."""
        self.magnitudes.append(magnitude)
        self.heat_ratio_eps.append(report.heat_ratio_eps)
        self.eigen_eps.append(report.eigen_eps)
        self.distortion.append(distortion)

    def monotone(self, column: str) -> bool:
        """Whether ``column`` is non-decreasing in the magnitude."""
        frame = self.to_frame().sort_values("magnitude")
        return bool(frame[column].is_monotonic_increasing)

    def to_frame(self) -> pd.DataFrame:
        """Ladder as a table (one row per magnitude)."""
        return pd.DataFrame(
            {
                "magnitude": self.magnitudes,
                "heat_ratio_eps": self.heat_ratio_eps,
                "eigen_eps": self.eigen_eps,
                "distortion": self.distortion,
            }
        )
