"""Window (vertex subset) selection rules."""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from tiresias.errors import SpaceConstructionError
from tiresias.mms.models import DiscreteSpace


def ball(space: DiscreteSpace, centre: int, radius: float) -> np.ndarray:
    """Vertices at distance < radius from ``centre`` (always contains the centre)."""
    return np.flatnonzero(space.distance[centre] < radius)


def arc_window(space: DiscreteSpace, start: int, count: int) -> np.ndarray:
    """``count`` consecutive vertex ids starting at ``start`` (wrapping)."""
    if count < 1 or count > space.vertex_count:
        raise SpaceConstructionError(
            "window size out of range", details={"count": count, "vertices": space.vertex_count}
        )
    return np.sort((start + np.arange(count)) % space.vertex_count)


def is_connected_subset(space: DiscreteSpace, vertices: np.ndarray) -> bool:
    """Whether the induced subgraph on ``vertices`` is connected."""
    vertices = np.asarray(vertices)
    if vertices.size == 0:
        return False
    local = {int(v): k for k, v in enumerate(vertices)}
    rows, cols = [], []
    for i, j in space.edges:
        if int(i) in local and int(j) in local:
            rows.append(local[int(i)])
            cols.append(local[int(j)])
    graph = csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(vertices.size, vertices.size)
    )
    n_components, _ = connected_components(graph, directed=False)
    return bool(n_components == 1)


def select_window(space: DiscreteSpace, rule: str, **params: object) -> np.ndarray:
    """Resolve a window rule from configuration.

    Rules:
        ``all``: every vertex
        ``arc``: ``start`` and ``count`` or ``fraction`` of the vertex count
        ``ball``: ``centre`` and ``radius``
        ``vertices``: explicit ``vertices`` list

    Raises:
        SpaceConstructionError: For unknown rules, empty or disconnected windows
    """
    if rule == "all":
        window = np.arange(space.vertex_count)
    elif rule == "arc":
        start = int(params.get("start", 0))  # type: ignore[call-overload]
        if params.get("count") is not None:
            count = int(params["count"])  # type: ignore[call-overload]
        else:
            fraction = float(params.get("fraction", 0.25))  # type: ignore[arg-type]
            count = max(1, int(round(fraction * space.vertex_count)))
        window = arc_window(space, start, count)
    elif rule == "ball":
        window = ball(space, int(params["centre"]), float(params["radius"]))  # type: ignore[call-overload,arg-type]
    elif rule == "vertices":
        window = np.unique(np.asarray(params["vertices"], dtype=np.int64))
    else:
        raise SpaceConstructionError("unknown window rule", details={"rule": rule})

    if window.size == 0:
        raise SpaceConstructionError("window is empty", details={"rule": rule})
    if not is_connected_subset(space, window):
        raise SpaceConstructionError("window is not connected", details={"rule": rule})
    return window


def farthest_point_net(vertices: np.ndarray, distance: np.ndarray, size: int) -> tuple[int, ...]:
    """Greedy farthest-point net of ``size`` window vertices.

    Args:
        vertices: Global ids of the window
        distance: Metric restricted to the window
        size: Number of net points (capped at the window size)

    Returns:
        Global ids of the net, first pick is the first window vertex
    """
    size = min(size, int(vertices.shape[0]))
    picks = [0]
    reach = distance[0].copy()
    while len(picks) < size:
        nxt = int(np.argmax(reach))
        picks.append(nxt)
        reach = np.minimum(reach, distance[nxt])
    return tuple(int(vertices[i]) for i in picks)
