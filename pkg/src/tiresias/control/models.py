"""Domain models for influence domains, slices and control estimates."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from tiresias.mms.models import DiscreteSpace


def domain_of_influence(space: DiscreteSpace, generators: Sequence[int], tau: float) -> np.ndarray:
    """Ground-truth X(U, τ) = {x : d(x, U) < τ} (validation only)."""
    if tau <= 0 or len(generators) == 0:
        return np.zeros(0, dtype=np.int64)
    reach = np.min(space.distance[list(generators)], axis=0)
    return np.flatnonzero(reach < tau)


@dataclass(frozen=True, eq=False)
class InfluenceDomain:
    """X(U, τ) seen from both sides.

    Attributes:
        generators: Global ids of U ⊆ V
        tau: Time τ
        projector: Modal projector onto span{u^f(τ)} (data side)
        vertices: X(U, τ) on the true space, when validation is enabled
    """

    generators: tuple[int, ...]
    tau: float
    projector: np.ndarray
    vertices: np.ndarray | None = None

    @property
    def rank(self) -> int:
        """Dimension of the projected span."""
        return int(round(float(np.trace(self.projector))))


@dataclass(frozen=True, eq=False)
class SliceFamily:
    """I = ∩_l X(B(ξ_l, δ), s_outer_l) \\ X(B(ξ_l, δ), s_inner_l).

    Attributes:
        net: Net points ξ_l (global ids in V)
        profile: Candidate distances r(ξ_l)
        k: Shrink parameter
        delta: Ball radius δ around each net point
        outer_times: s_{2l−1} = r(ξ_l) + 2/k
        inner_times: s_{2l} = r(ξ_l) − 2/k
    """

    net: tuple[int, ...]
    profile: np.ndarray
    k: int
    delta: float
    outer_times: np.ndarray
    inner_times: np.ndarray

    def __post_init__(self) -> None:
        count = len(self.net)
        if self.profile.shape != (count,):
            raise ValueError("profile must have one entry per net point")
        if self.outer_times.shape != (count,) or self.inner_times.shape != (count,):
            raise ValueError("slice times must have one entry per net point")
        if self.k < 1 or self.delta <= 0:
            raise ValueError("slice needs k >= 1 and delta > 0")

    @classmethod
    def schedule(
        cls, net: Sequence[int], profile: np.ndarray, k: int, min_radius: float = 0.0
    ) -> "SliceFamily":
        """Default schedule: δ = max(1/2k, min_radius), s = r(ξ_l) ± 2/k."""
        profile = np.asarray(profile, dtype=float)
        return cls(
            net=tuple(int(v) for v in net),
            profile=profile,
            k=k,
            delta=max(1.0 / (2.0 * k), min_radius),
            outer_times=profile + 2.0 / k,
            inner_times=profile - 2.0 / k,
        )

    @classmethod
    def whole_space(cls, net: Sequence[int], horizon: float, min_radius: float) -> "SliceFamily":
        """Trivial bounds: outer time beyond the diameter, no inner domain."""
        count = len(net)
        return cls(
            net=tuple(int(v) for v in net),
            profile=np.full(count, horizon),
            k=1,
            delta=min_radius,
            outer_times=np.full(count, horizon),
            inner_times=np.zeros(count),
        )

    def ground_truth_set(self, space: DiscreteSpace) -> np.ndarray:
        """The slice evaluated on the true space (validation only)."""
        inside = np.ones(space.vertex_count, dtype=bool)
        for xi, outer, inner in zip(self.net, self.outer_times, self.inner_times, strict=True):
            ball = np.flatnonzero(space.distance[xi] <= self.delta)
            reach = np.min(space.distance[ball], axis=0)
            inside &= reach < outer
            if inner > 0:
                inside &= ~(reach < inner)
        return np.flatnonzero(inside)


@dataclass(frozen=True)
class VolumeEstimate:
    """Controllability volume estimate.

    Attributes:
        volume: m̂ of the set
        residual: ‖(I − P) e_0‖² at the working basis
        refined_residual: Same after halving the hat spacing
        converged: Whether the residual plateaued (change < tolerance)
    """

    volume: float
    residual: float
    refined_residual: float
    converged: bool


@dataclass(frozen=True, eq=False)
class PointEigenvalues:
    """Eigenfunction values at a point recovered from shrinking slices.

    Attributes:
        values: φ̂_j(p) for every extracted mode, in the extracted gauge
        ks: Shrink parameters used
        volumes: m̂(I_k) per k
        partial: Whether the volume collapsed before the last k
        diagnostic: Reason for a partial result
    """

    values: np.ndarray
    ks: tuple[int, ...]
    volumes: tuple[float, ...]
    partial: bool = False
    diagnostic: str | None = None


@dataclass(frozen=True, eq=False)
class ProfileCandidate:
    """One candidate distance profile and its acceptance record."""

    values: np.ndarray
    accepted: bool
    achieved_k: int
    volumes: tuple[float, ...] = ()


@dataclass(eq=False)
class ProfileSearchResult:
    """Recovered set of local distance functions R̂_V on a net.

    Attributes:
        net: Net points (global ids)
        candidates: Every evaluated candidate
        k_max: Deepest shrink parameter tested
        lattice_step: Spacing of the candidate lattice
        collisions: Groups of accepted candidates closer than the lattice step
    """

    net: tuple[int, ...]
    candidates: list[ProfileCandidate]
    k_max: int
    lattice_step: float
    collisions: list[list[int]] = field(default_factory=list)

    @property
    def accepted(self) -> list[ProfileCandidate]:
        """Accepted candidates."""
        return [c for c in self.candidates if c.accepted]

    def accepted_matrix(self) -> np.ndarray:
        """Accepted profiles stacked as (candidate × net point)."""
        rows = [c.values for c in self.accepted]
        return np.vstack(rows) if rows else np.zeros((0, len(self.net)))

    def to_frame(self) -> pd.DataFrame:
        """R̂_V as a candidate × net-point table with flags and achieved k."""
        columns = [f"xi_{v}" for v in self.net]
        frame = pd.DataFrame(
            np.vstack([c.values for c in self.candidates])
            if self.candidates
            else np.zeros((0, len(self.net))),
            columns=columns,
        )
        frame["accepted"] = [c.accepted for c in self.candidates]
        frame["achieved_k"] = [c.achieved_k for c in self.candidates]
        return frame
