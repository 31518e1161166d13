"""Slice machinery: eigenfunction values at interior points and distance profiles."""

from collections.abc import Sequence

import numpy as np

from tiresias.control.models import (
    PointEigenvalues,
    ProfileCandidate,
    ProfileSearchResult,
    SliceFamily,
)
from tiresias.control.projections import ProjectionEngine
from tiresias.errors import ResolutionError
from tiresias.mms.models import DiscreteSpace
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="SliceMachinery")

COLLAPSE_FRACTION = 1e-3


def nearest_spacing(window_distance: np.ndarray) -> float:
    """Largest nearest-neighbour distance inside the window (δ floor)."""
    if window_distance.shape[0] < 2:
        return 0.0
    masked = window_distance + np.diag(np.full(window_distance.shape[0], np.inf))
    return float(np.max(np.min(masked, axis=1)))


def _net_positions(engine: ProjectionEngine, net: Sequence[int]) -> np.ndarray:
    position = {int(v): i for i, v in enumerate(engine.extracted.vertices)}
    return np.array([position[int(v)] for v in net], dtype=np.int64)


def _ball_mass(engine: ProjectionEngine, net: Sequence[int], radius: float) -> float:
    """min_l m_V(B(ξ_l, radius)) over the net."""
    extracted = engine.extracted
    rows = extracted.window_distance[_net_positions(engine, net)]
    masses = (rows <= radius) @ extracted.measure_on_V
    return float(np.min(masses))


def _extrapolate(ks: Sequence[int], samples: np.ndarray) -> np.ndarray:
    """Polynomial (degree ≤ 2) extrapolation in 1/k to 1/k = 0, per column."""
    inverse = 1.0 / np.asarray(ks, dtype=float)
    degree = min(2, len(ks) - 1)
    if degree == 0:
        result: np.ndarray = samples[0].copy()
        return result
    coefficients = np.polynomial.polynomial.polyfit(inverse, samples, degree)
    return np.asarray(coefficients[0])


def recover_point_eigenvalues(
    engine: ProjectionEngine,
    net: Sequence[int],
    profile: np.ndarray,
    ks: Sequence[int],
) -> PointEigenvalues:
    """φ̂_j(p) for the point p whose distance profile on the net is ``profile``.

    For each k, (1/m(I_k)) ∫_{I_k} φ_j dm = φ_0 (P_I e_0)_j / (P_I e_0)_0; the
    sequence is extrapolated in 1/k. Values come out in the gauge of the
    extracted data.
    """
    extracted = engine.extracted
    min_radius = nearest_spacing(extracted.window_distance)
    collapse = COLLAPSE_FRACTION * extracted.mass

    used_ks: list[int] = []
    volumes: list[float] = []
    samples: list[np.ndarray] = []
    diagnostic = None
    for k in sorted(ks):
        family = SliceFamily.schedule(net, profile, k, min_radius)
        vector = engine.slice_vector(family)
        volume = engine.vector_volume(vector)
        if volume <= collapse or vector[0] <= 0:
            diagnostic = f"slice volume collapsed at k={k}"
            break
        used_ks.append(k)
        volumes.append(volume)
        samples.append(extracted.phi0 * vector / vector[0])

    if not samples:
        logger.warning("point_eigenvalues_failed", reason=diagnostic)
        return PointEigenvalues(
            values=np.full(extracted.mode_cutoff, np.nan),
            ks=(),
            volumes=(),
            partial=True,
            diagnostic=diagnostic,
        )

    values = _extrapolate(used_ks, np.vstack(samples))
    values[0] = extracted.phi0
    partial = len(used_ks) < len(ks)
    if partial:
        logger.warning("point_eigenvalues_partial", ks=used_ks, reason=diagnostic)
    return PointEigenvalues(
        values=values,
        ks=tuple(used_ks),
        volumes=tuple(volumes),
        partial=partial,
        diagnostic=diagnostic if partial else None,
    )


def evaluate_profile(
    engine: ProjectionEngine,
    net: Sequence[int],
    profile: np.ndarray,
    ks: Sequence[int],
    vol_fraction: float = 0.5,
) -> ProfileCandidate:
    """Accept ``profile`` iff every slice volume up to max(ks) stays above threshold.

    The threshold at scale k is ``vol_fraction`` times the smallest window
    mass of a ball of radius δ_k around a net point.
    """
    min_radius = nearest_spacing(engine.extracted.window_distance)
    achieved = 0
    volumes = []
    for k in sorted(ks):
        family = SliceFamily.schedule(net, profile, k, min_radius)
        volume = engine.slice_volume(family)
        volumes.append(volume)
        if volume < vol_fraction * _ball_mass(engine, net, family.delta):
            break
        achieved = k
    accepted = achieved == max(ks)
    return ProfileCandidate(
        values=np.asarray(profile, dtype=float),
        accepted=accepted,
        achieved_k=achieved,
        volumes=tuple(volumes),
    )


def _collision_groups(profiles: np.ndarray, resolution: float) -> list[list[int]]:
    count = profiles.shape[0]
    parent = list(range(count))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a in range(count):
        for b in range(a + 1, count):
            if np.max(np.abs(profiles[a] - profiles[b])) <= resolution:
                parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for i in range(count):
        groups.setdefault(find(i), []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def recover_distance_function(
    engine: ProjectionEngine,
    net: Sequence[int],
    candidates: np.ndarray,
    ks: Sequence[int],
    lattice_step: float,
    vol_fraction: float = 0.5,
) -> ProfileSearchResult:
    """Membership test of candidate profiles: the recovered set R̂_V.

    Args:
        engine: Projection engine over the extracted data
        net: Net points ξ_l
        candidates: Candidate profiles, shape (C, |net|)
        ks: Shrink schedule; acceptance requires the deepest one
        lattice_step: Candidate lattice spacing (collision resolution)
        vol_fraction: Acceptance fraction of the reference ball mass

    Raises:
        ResolutionError: If no candidate is accepted
    """
    records = [
        evaluate_profile(engine, net, np.asarray(c, dtype=float), ks, vol_fraction)
        for c in np.atleast_2d(candidates)
    ]
    result = ProfileSearchResult(
        net=tuple(int(v) for v in net),
        candidates=records,
        k_max=max(ks),
        lattice_step=lattice_step,
    )
    accepted = result.accepted_matrix()
    if accepted.shape[0] == 0:
        logger.error("no_profile_accepted", candidates=len(records), k_max=max(ks))
        raise ResolutionError(
            "no candidate profile accepted; coarsen k_max or refine the lattice",
            details={"candidates": len(records), "k_max": max(ks), "lattice_step": lattice_step},
        )
    result.collisions = _collision_groups(accepted, 0.5 * lattice_step)
    if result.collisions:
        logger.warning("profile_collisions", groups=len(result.collisions))
    logger.info(
        "distance_profiles_recovered",
        candidates=len(records),
        accepted=int(accepted.shape[0]),
        k_max=max(ks),
    )
    return result


def search_profiles(
    engine: ProjectionEngine,
    net: Sequence[int],
    lattice_step: float,
    max_radius: float,
    ks: Sequence[int],
    vol_fraction: float = 0.5,
    max_candidates: int = 20000,
) -> ProfileSearchResult:
    """Enumerate lattice profiles depth-first and test the survivors.

    A partial profile is pruned when it breaks the Lipschitz or triangle
    bounds of the window metric (one lattice step of slack) or when the slice
    built from its assigned entries is empty at the coarsest k.
    """
    positions = _net_positions(engine, net)
    metric = engine.extracted.window_distance[np.ix_(positions, positions)]
    lattice = lattice_step * np.arange(int(np.floor(max_radius / lattice_step)) + 1)
    coarse = min(ks)
    min_radius = nearest_spacing(engine.extracted.window_distance)
    threshold = vol_fraction * _ball_mass(engine, net, max(1.0 / (2.0 * coarse), min_radius))

    survivors: list[np.ndarray] = []
    truncated = False

    def extend(prefix: list[float]) -> None:
        nonlocal truncated
        if truncated:
            return
        depth = len(prefix)
        if depth == len(net):
            survivors.append(np.array(prefix))
            truncated = len(survivors) >= max_candidates
            return
        for value in lattice:
            gaps = np.abs(value - np.array(prefix)) if prefix else np.zeros(0)
            sums = value + np.array(prefix) if prefix else np.zeros(0)
            bounds = metric[depth, :depth]
            if np.any(gaps > bounds + lattice_step) or np.any(sums < bounds - lattice_step):
                continue
            candidate = [*prefix, float(value)]
            family = SliceFamily.schedule(net[: depth + 1], np.array(candidate), coarse, min_radius)
            if engine.slice_volume(family) < threshold:
                continue
            extend(candidate)

    extend([])
    if truncated:
        logger.warning("profile_search_truncated", max_candidates=max_candidates)
    logger.info("profile_search_complete", survivors=len(survivors), lattice=int(lattice.size))
    if not survivors:
        raise ResolutionError(
            "no lattice profile survived pruning",
            details={"lattice_step": lattice_step, "max_radius": max_radius},
        )
    return recover_distance_function(
        engine, net, np.vstack(survivors), ks, lattice_step, vol_fraction
    )


def true_profiles(space: DiscreteSpace, net: Sequence[int]) -> np.ndarray:
    """r_x(ξ_l) = d(x, ξ_l) for every vertex (validation only), shape (n, |net|)."""
    result: np.ndarray = space.distance[:, list(net)]
    return result


def profile_collisions(
    space: DiscreteSpace, net: Sequence[int], resolution: float
) -> list[list[int]]:
    """Groups of vertices whose true profiles agree within ``resolution``."""
    return _collision_groups(true_profiles(space, net), resolution)
