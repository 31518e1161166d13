"""Builders for exemplar spaces and space transformations.

Exemplars (circle, weighted interval, torus) use second-order stencils so
their spectra converge to the continuum ones; user graphs fall back to
inverse-length conductances.
"""

from collections.abc import Callable
from dataclasses import replace

import numpy as np

from tiresias.errors import SpaceConstructionError
from tiresias.mms.models import DiscreteSpace, SpaceMetadata, _frozen
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="SpaceBuilder")

MIN_CYCLE_VERTICES = 8

DensityProfile = Callable[[np.ndarray], np.ndarray]

DENSITY_PROFILES: dict[str, DensityProfile] = {
    "uniform": lambda x: np.ones_like(x),
    "linear": lambda x: 1.0 + x,
    "quadratic": lambda x: 1.0 + x**2,
    "exponential": lambda x: np.exp(x),
}


def build_circle(
    n_vertices: int, radius: float = 1.0, metadata: SpaceMetadata | None = None
) -> DiscreteSpace:
    """Uniform cycle graph approximating a circle of the given radius.

    Args:
        n_vertices: Number of vertices (at least 8)
        radius: Circle radius R

    Returns:
        DiscreteSpace with edge lengths and masses 2πR/n

    Raises:
        SpaceConstructionError: If n_vertices < 8 or radius <= 0
    """
    if n_vertices < MIN_CYCLE_VERTICES:
        raise SpaceConstructionError(
            "circle needs at least 8 vertices",
            details={"n_vertices": n_vertices},
        )
    if radius <= 0:
        raise SpaceConstructionError("radius must be positive", details={"radius": radius})

    h = 2.0 * np.pi * radius / n_vertices
    index = np.arange(n_vertices)
    edges = np.column_stack([index, (index + 1) % n_vertices])
    lengths = np.full(n_vertices, h)
    metadata = metadata or SpaceMetadata(
        curvature_bound=0.0, dimension_bound=1.0, essential_dimension=1, diameter=0.0
    )

    space = DiscreteSpace.from_edges(
        name=f"circle-{n_vertices}",
        measure=np.full(n_vertices, h),
        edges=edges,
        lengths=lengths,
        conductances=np.full(n_vertices, 1.0 / h),
        metadata=metadata,
        coordinates=(index * h)[:, None],
    )
    logger.debug("circle_built", n_vertices=n_vertices, radius=radius, h=h)
    return space


def build_weighted_interval(
    n: int,
    length: float = 1.0,
    density_profile: str | DensityProfile = "uniform",
    metadata: SpaceMetadata | None = None,
) -> DiscreteSpace:
    """Path graph discretizing (1/ρ)(ρu')' with Neumann ends.

    Masses are ρ(x_i)·h with halves at the endpoints; the conductance of edge
    (i, i+1) is ρ(x_{i+1/2})/h.

    Args:
        n: Number of vertices
        length: Interval length
        density_profile: Name in ``DENSITY_PROFILES`` or a callable ρ(x)

    Raises:
        SpaceConstructionError: For unknown profiles or non-positive densities
    """
    if n < 3:
        raise SpaceConstructionError("interval needs at least 3 vertices", details={"n": n})
    if length <= 0:
        raise SpaceConstructionError("length must be positive", details={"length": length})

    if isinstance(density_profile, str):
        if density_profile not in DENSITY_PROFILES:
            raise SpaceConstructionError(
                "unknown density profile",
                details={"profile": density_profile, "known": sorted(DENSITY_PROFILES)},
            )
        profile_name = density_profile
        rho = DENSITY_PROFILES[density_profile]
    else:
        profile_name = getattr(density_profile, "__name__", "custom")
        rho = density_profile

    h = length / (n - 1)
    nodes = np.arange(n) * h
    midpoints = (np.arange(n - 1) + 0.5) * h
    rho_nodes = np.asarray(rho(nodes), dtype=float)
    rho_mid = np.asarray(rho(midpoints), dtype=float)
    if np.any(rho_nodes <= 0) or np.any(rho_mid <= 0):
        raise SpaceConstructionError(
            "density must be positive on the interval",
            details={"profile": profile_name, "min": float(min(rho_nodes.min(), rho_mid.min()))},
        )

    measure = rho_nodes * h
    measure[0] *= 0.5
    measure[-1] *= 0.5
    edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])

    return DiscreteSpace.from_edges(
        name=f"interval-{n}-{profile_name}",
        measure=measure,
        edges=edges,
        lengths=np.full(n - 1, h),
        conductances=rho_mid / h,
        metadata=metadata or SpaceMetadata(0.0, 1.0, 1, 0.0),
        coordinates=nodes[:, None],
    )


def product_space(first: DiscreteSpace, second: DiscreteSpace, name: str | None = None) -> DiscreteSpace:
    """Cartesian product with product measure and L = L_1 ⊗ I + I ⊗ L_2.

    Vertex (a, b) gets index a * n_2 + b. Edge conductances are weighted by the
    mass of the other factor so the stiffness is W_1 ⊗ M_2 + M_1 ⊗ W_2.
    """
    n1, n2 = first.vertex_count, second.vertex_count
    grid_b = np.arange(n2)
    grid_a = np.arange(n1)

    edges_a = np.concatenate(
        [np.column_stack([i * n2 + grid_b, j * n2 + grid_b]) for i, j in first.edges]
    )
    lengths_a = np.repeat(first.lengths, n2)
    cond_a = np.concatenate([c * second.measure for c in first.conductances])

    edges_b = np.concatenate(
        [np.column_stack([grid_a * n2 + i, grid_a * n2 + j]) for i, j in second.edges]
    )
    lengths_b = np.repeat(second.lengths, n1)
    cond_b = np.concatenate([c * first.measure for c in second.conductances])

    coordinates = None
    if first.coordinates is not None and second.coordinates is not None:
        coordinates = np.column_stack(
            [
                np.repeat(first.coordinates, n2, axis=0),
                np.tile(second.coordinates, (n1, 1)),
            ]
        )

    metadata = SpaceMetadata(
        curvature_bound=min(first.metadata.curvature_bound, second.metadata.curvature_bound),
        dimension_bound=first.metadata.dimension_bound + second.metadata.dimension_bound,
        essential_dimension=first.metadata.essential_dimension
        + second.metadata.essential_dimension,
        diameter=0.0,
    )

    return DiscreteSpace.from_edges(
        name=name or f"{first.name}x{second.name}",
        measure=np.outer(first.measure, second.measure).ravel(),
        edges=np.concatenate([edges_a, edges_b]),
        lengths=np.concatenate([lengths_a, lengths_b]),
        conductances=np.concatenate([cond_a, cond_b]),
        metadata=metadata,
        coordinates=coordinates,
    )


def build_torus_mesh(
    n1: int, n2: int, lengths: tuple[float, float] = (2.0 * np.pi, 2.0 * np.pi)
) -> DiscreteSpace:
    """Flat torus as the product of two cycle graphs.

    Args:
        n1: Vertices along the first factor (at least 8)
        n2: Vertices along the second factor (at least 8)
        lengths: Circumferences (ℓ1, ℓ2)
    """
    if n1 < MIN_CYCLE_VERTICES or n2 < MIN_CYCLE_VERTICES:
        raise SpaceConstructionError(
            "torus factors need at least 8 vertices", details={"n1": n1, "n2": n2}
        )
    first = build_circle(n1, lengths[0] / (2.0 * np.pi))
    second = build_circle(n2, lengths[1] / (2.0 * np.pi))
    return product_space(first, second, name=f"torus-{n1}x{n2}")


def _edge_table(space: DiscreteSpace) -> dict[tuple[int, int], tuple[float, float]]:
    return {
        (int(i), int(j)): (float(length), float(cond))
        for (i, j), length, cond in zip(space.edges, space.lengths, space.conductances, strict=True)
    }


def quotient_space(
    space: DiscreteSpace, vertex_involution: np.ndarray, rtol: float = 1e-12
) -> DiscreteSpace:
    """Quotient of a space by a vertex involution.

    Orbit masses are sums of member masses; edges between distinct orbits keep
    their length and add their conductances; edges inside an orbit vanish.

    Args:
        space: Space to fold
        vertex_involution: Permutation σ with σ∘σ = id preserving edges,
            lengths, conductances and measure
        rtol: Relative tolerance for the equivariance checks

    Raises:
        SpaceConstructionError: If σ is not an equivariant involution; the
            violating vertex or edge is reported
    """
    sigma = np.asarray(vertex_involution, dtype=np.int64)
    n = space.vertex_count
    if sigma.shape != (n,) or not np.array_equal(np.sort(sigma), np.arange(n)):
        raise SpaceConstructionError("involution must be a permutation of the vertices")
    if not np.array_equal(sigma[sigma], np.arange(n)):
        bad = int(np.flatnonzero(sigma[sigma] != np.arange(n))[0])
        raise SpaceConstructionError("map is not an involution", details={"vertex": bad})
    if not np.allclose(space.measure[sigma], space.measure, rtol=rtol, atol=0.0):
        bad = int(np.argmax(np.abs(space.measure[sigma] - space.measure)))
        raise SpaceConstructionError("involution does not preserve measure", details={"vertex": bad})

    table = _edge_table(space)
    for (i, j), (length, cond) in table.items():
        a, b = sorted((int(sigma[i]), int(sigma[j])))
        image = table.get((a, b))
        if (
            image is None
            or not np.isclose(image[0], length, rtol=rtol, atol=0.0)
            or not np.isclose(image[1], cond, rtol=rtol, atol=0.0)
        ):
            raise SpaceConstructionError(
                "involution does not preserve edges", details={"edge": (i, j), "image": (a, b)}
            )

    representatives = np.minimum(np.arange(n), sigma)
    reps_sorted = np.unique(representatives)
    orbit_of = np.searchsorted(reps_sorted, representatives)
    orbit_count = reps_sorted.shape[0]

    measure = np.zeros(orbit_count)
    np.add.at(measure, orbit_of, space.measure)

    merged: dict[tuple[int, int], list[float]] = {}
    for (i, j), (length, cond) in table.items():
        a, b = sorted((int(orbit_of[i]), int(orbit_of[j])))
        if a == b:
            continue
        entry = merged.setdefault((a, b), [length, 0.0])
        entry[0] = min(entry[0], length)
        entry[1] += cond

    keys = sorted(merged)
    coordinates = None if space.coordinates is None else space.coordinates[reps_sorted]
    quotient = DiscreteSpace.from_edges(
        name=f"{space.name}-quotient",
        measure=measure,
        edges=np.array(keys, dtype=np.int64).reshape(-1, 2),
        lengths=np.array([merged[k][0] for k in keys]),
        conductances=np.array([merged[k][1] for k in keys]),
        metadata=replace(space.metadata, diameter=0.0),
        coordinates=coordinates,
    )
    logger.info("quotient_built", source=space.name, orbits=orbit_count)
    return quotient


def orbit_labels(vertex_involution: np.ndarray) -> np.ndarray:
    """Quotient vertex index of every original vertex (as used by quotient_space)."""
    sigma = np.asarray(vertex_involution, dtype=np.int64)
    representatives = np.minimum(np.arange(sigma.shape[0]), sigma)
    return np.searchsorted(np.unique(representatives), representatives)


def reflection(n_vertices: int) -> np.ndarray:
    """Involution i ↦ -i mod n of a cycle graph."""
    return (-np.arange(n_vertices)) % n_vertices


def torus_antipodal_map(n1: int, n2: int) -> np.ndarray:
    """Involution (x, y) ↦ (-x, -y) on a torus mesh."""
    a = (-np.arange(n1)) % n1
    b = (-np.arange(n2)) % n2
    return (a[:, None] * n2 + b[None, :]).ravel()


def relabel(space: DiscreteSpace, permutation: np.ndarray) -> DiscreteSpace:
    """Isometric copy where old vertex i becomes vertex permutation[i].

    The distance matrix is permuted rather than recomputed, so the copy is
    exactly isometric.
    """
    perm = np.asarray(permutation, dtype=np.int64)
    n = space.vertex_count
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise SpaceConstructionError("relabeling must be a permutation of the vertices")

    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(n)
    coordinates = None if space.coordinates is None else space.coordinates[inverse]

    return DiscreteSpace(
        name=f"{space.name}-relabeled",
        measure=_frozen(space.measure[inverse]),
        edges=_frozen(np.sort(perm[space.edges], axis=1), dtype=np.int64),
        lengths=space.lengths,
        conductances=space.conductances,
        distance=_frozen(space.distance[np.ix_(inverse, inverse)]),
        metadata=space.metadata,
        coordinates=None if coordinates is None else _frozen(coordinates),
    )


def scale_measure(space: DiscreteSpace, factor: float) -> DiscreteSpace:
    """Same graph and metric with every mass multiplied by ``factor``."""
    if factor <= 0:
        raise SpaceConstructionError("measure factor must be positive", details={"factor": factor})
    return replace(space, name=f"{space.name}-mass{factor:g}", measure=_frozen(space.measure * factor))


def perturbation_direction(edge_count: int, seed: int) -> np.ndarray:
    """Fixed random direction in [-1, 1]^E shared by a perturbation ladder."""
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=edge_count)


def perturb_edge_lengths(space: DiscreteSpace, relative: float, seed: int = 0) -> DiscreteSpace:
    """Multiply each edge length by (1 + relative·ξ_e) for a seeded direction ξ.

    Conductances are rescaled by the inverse length factor. The measure is
    kept, so the perturbation changes metric and Laplacian only.
    """
    if not 0 <= relative < 1:
        raise SpaceConstructionError("relative perturbation must lie in [0, 1)", details={"relative": relative})
    factor = 1.0 + relative * perturbation_direction(space.edges.shape[0], seed)
    return DiscreteSpace.from_edges(
        name=f"{space.name}-perturbed{relative:g}",
        measure=space.measure,
        edges=space.edges,
        lengths=space.lengths * factor,
        conductances=space.conductances / factor,
        metadata=replace(space.metadata, diameter=0.0),
        coordinates=space.coordinates,
    )
