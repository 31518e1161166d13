"""Domain models for reconstruction results."""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from tiresias.reconstruct.varadhan import VaradhanMatrix

CUT_LOCUS_FRACTION = 0.45


@dataclass(frozen=True)
class ComparisonReport:
    """Reconstruction against the ground truth through the simulation correspondence.

    Attributes:
        max_metric_distortion: max |d̂ − d| over pairs with d ≤ 0.45·diam
        far_pair_distortion: Same over the remaining pairs (reported separately)
        diameter: Ground-truth diameter
        mass_error: |m̂ − m| / m
        density_ratio_error: max |ρ̂/ρ̂(ref) − ρ/ρ(ref)| / (ρ/ρ(ref)) over the points
        eigenfunction_error: Gauge-aligned max |φ̂ − φ| over the points
        pairs_compared: Number of near pairs
    """

    max_metric_distortion: float
    far_pair_distortion: float
    diameter: float
    mass_error: float
    density_ratio_error: float
    eigenfunction_error: float
    pairs_compared: int

    @property
    def relative_distortion(self) -> float:
        """Near-pair distortion as a fraction of the diameter."""
        return self.max_metric_distortion / self.diameter if self.diameter > 0 else 0.0


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Metric-measure copy of the space on the recovered point set.

    Attributes:
        labels: One label per point (``"V:<id>"`` for window vertices,
            ``"p:<k>"`` for recovered interior points)
        correspondence: Ground-truth vertex per point, -1 when unknown
        distance: d̂, symmetric with zero diagonal
        density: ρ̂ per point
        dimension: n̂ per point
        mass: Recovered m(X)
        eigenvalues: λ̂_j used for the synthesis
        point_values: φ̂_j at every point, shape (J, P)
        varadhan: Per-pair fit diagnostics
        times: Time grid of the fits
        comparison: Ground-truth comparison (validation runs only)
        reference_distance: Ground-truth distances on the points (validation only)
        provenance: Inputs and schedules behind the result
    """

    labels: tuple[str, ...]
    correspondence: np.ndarray
    distance: np.ndarray
    density: np.ndarray
    dimension: np.ndarray
    mass: float
    eigenvalues: np.ndarray
    point_values: np.ndarray
    varadhan: VaradhanMatrix
    times: np.ndarray
    comparison: ComparisonReport | None = None
    reference_distance: np.ndarray | None = None
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        count = len(self.labels)
        if self.distance.shape != (count, count):
            raise ValueError(f"distance shape {self.distance.shape} != ({count}, {count})")
        if not np.array_equal(self.distance, self.distance.T, equal_nan=True):
            raise ValueError("recovered distance must be symmetric")
        if np.any(np.diag(self.distance) != 0):
            raise ValueError("recovered distance must have a zero diagonal")

    @property
    def size(self) -> int:
        """Number of reconstructed points."""
        return len(self.labels)

    def triangle_violations(self, tolerance: float = 0.0) -> pd.DataFrame:
        """Triples with d̂(i, j) > d̂(i, k) + d̂(k, j) + tolerance.

        Returns:
            DataFrame with columns i, j, via, magnitude (i < j), worst first
        """
        d = self.distance
        # excess[i, j, k] = d(i, j) − d(i, k) − d(k, j)
        excess = d[:, :, None] - d[:, None, :] - d.T[None, :, :]
        best_via = np.argmax(excess, axis=2)
        worst = np.take_along_axis(excess, best_via[:, :, None], axis=2)[:, :, 0]
        i, j = np.nonzero(np.triu(worst > tolerance, k=1))
        frame = pd.DataFrame({"i": i, "j": j, "via": best_via[i, j], "magnitude": worst[i, j]})
        return frame.sort_values("magnitude", ascending=False, ignore_index=True)

    def max_triangle_violation(self) -> float:
        """Largest triangle-inequality excess (0 when none)."""
        frame = self.triangle_violations()
        return float(frame["magnitude"].iloc[0]) if len(frame) else 0.0

    def points_frame(self) -> pd.DataFrame:
        """Per-point table: label, correspondence, n̂, ρ̂."""
        return pd.DataFrame(
            {
                "label": list(self.labels),
                "vertex": self.correspondence,
                "dimension": self.dimension,
                "density": self.density,
            }
        )

    def pairs_frame(self) -> pd.DataFrame:
        """Per-pair table (p < q) of d̂ and, when known, d."""
        p, q = np.triu_indices(self.size, k=1)
        frame = pd.DataFrame(
            {
                "p": p,
                "q": q,
                "d_hat": self.distance[p, q],
                "fit_residual": self.varadhan.residual[p, q],
                "flagged": self.varadhan.flagged[p, q],
            }
        )
        if self.reference_distance is not None:
            frame["d_true"] = self.reference_distance[p, q]
            frame["error"] = np.abs(frame["d_hat"] - frame["d_true"])
        return frame
