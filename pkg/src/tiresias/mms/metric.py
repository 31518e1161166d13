"""Shortest-path metric on weighted graphs."""

from typing import TYPE_CHECKING

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from tiresias.errors import DisconnectedSpaceError
from tiresias.utils.logging import get_logger

if TYPE_CHECKING:
    from tiresias.mms.models import DiscreteSpace

logger = get_logger(__name__, component="GraphMetric")


def _adjacency(vertex_count: int, edges: np.ndarray, lengths: np.ndarray) -> csr_matrix:
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.concatenate([lengths, lengths])
    return csr_matrix((data, (rows, cols)), shape=(vertex_count, vertex_count))


def graph_distances(vertex_count: int, edges: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """All-pairs shortest-path distances over edge lengths.

    Args:
        vertex_count: Number of vertices
        edges: Integer array of shape (E, 2)
        lengths: Positive edge lengths of shape (E,)

    Returns:
        Symmetric (n, n) distance matrix with zero diagonal

    Raises:
        DisconnectedSpaceError: If some vertex cannot be reached from vertex 0
    """
    graph = _adjacency(vertex_count, edges, lengths)
    n_components, labels = connected_components(graph, directed=False)
    if n_components > 1:
        # report the component that does not contain vertex 0
        stray = labels != labels[0]
        component_label = int(np.min(labels[stray]))
        component = np.flatnonzero(labels == component_label).tolist()
        logger.error("disconnected_graph", components=int(n_components), size=len(component))
        raise DisconnectedSpaceError(component)

    distance = shortest_path(graph, method="D", directed=False)
    distance = np.minimum(distance, distance.T)
    np.fill_diagonal(distance, 0.0)
    return distance


def triangle_violation(distance: np.ndarray) -> float:
    """Largest amount by which d(i,k) exceeds d(i,j) + d(j,k) over all triples.

    Returns 0.0 when the triangle inequality holds everywhere.
    """
    worst = 0.0
    for j in range(distance.shape[0]):
        through_j = distance[:, j, None] + distance[None, j, :]
        worst = max(worst, float(np.max(distance - through_j)))
    return worst


def shortest_paths(space: "DiscreteSpace") -> np.ndarray:
    """Recompute the all-pairs shortest-path metric of ``space``.

    Raises:
        DisconnectedSpaceError: If the graph is disconnected
    """
    return graph_distances(space.vertex_count, space.edges, space.lengths)
