"""Discrete metric-measure spaces: builders, metric, serialization."""

from tiresias.mms.builders import (
    build_circle,
    build_torus_mesh,
    build_weighted_interval,
    orbit_labels,
    perturb_edge_lengths,
    product_space,
    quotient_space,
    reflection,
    relabel,
    scale_measure,
    torus_antipodal_map,
)
from tiresias.mms.io import dump_space, dumps_space, load_space, loads_space
from tiresias.mms.metric import graph_distances, shortest_paths, triangle_violation
from tiresias.mms.models import DiscreteSpace, SpaceMetadata
from tiresias.mms.windows import (
    arc_window,
    ball,
    farthest_point_net,
    is_connected_subset,
    select_window,
)


__all__ = [
    "DiscreteSpace",
    "SpaceMetadata",
    "arc_window",
    "ball",
    "build_circle",
    "build_torus_mesh",
    "build_weighted_interval",
    "dump_space",
    "dumps_space",
    "farthest_point_net",
    "graph_distances",
    "is_connected_subset",
    "load_space",
    "loads_space",
    "orbit_labels",
    "perturb_edge_lengths",
    "product_space",
    "quotient_space",
    "reflection",
    "relabel",
    "scale_measure",
    "select_window",
    "shortest_paths",
    "torus_antipodal_map",
    "triangle_violation",
]
