"""JSON serialization of discrete spaces.

Floats are written with ``repr`` precision, so a dump/load cycle reproduces
measure, lengths and conductances bit for bit; the metric is recomputed from
the edge lengths.
"""

import json
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from tiresias.errors import SpaceConstructionError
from tiresias.mms.models import DiscreteSpace, SpaceMetadata


class EdgeDocument(BaseModel):
    """One edge record."""

    i: int = Field(ge=0)
    j: int = Field(ge=0)
    len: float = Field(gt=0)
    weight: float = Field(gt=0, description="Laplacian conductance")


class MetadataDocument(BaseModel):
    """Declared structure constants."""

    K: float = 0.0
    N: float = 1.0
    n: int = 1
    D: float = 0.0


class SpaceDocument(BaseModel):
    """JSON-compatible tree for a DiscreteSpace."""

    name: str
    vertices: int = Field(gt=0)
    measure: list[float]
    edges: list[EdgeDocument]
    metadata: MetadataDocument
    coordinates: list[list[float]] | None = None


def to_document(space: DiscreteSpace) -> SpaceDocument:
    """Convert a space into its document form."""
    meta = space.metadata
    return SpaceDocument(
        name=space.name,
        vertices=space.vertex_count,
        measure=[float(m) for m in space.measure],
        edges=[
            EdgeDocument(i=int(i), j=int(j), len=float(length), weight=float(cond))
            for (i, j), length, cond in zip(
                space.edges, space.lengths, space.conductances, strict=True
            )
        ],
        metadata=MetadataDocument(
            K=meta.curvature_bound,
            N=meta.dimension_bound,
            n=meta.essential_dimension,
            D=meta.diameter,
        ),
        coordinates=None if space.coordinates is None else space.coordinates.tolist(),
    )


def from_document(document: SpaceDocument) -> DiscreteSpace:
    """Rebuild a space from its document form."""
    if len(document.measure) != document.vertices:
        raise SpaceConstructionError(
            "measure length does not match vertex count",
            details={"vertices": document.vertices, "measure": len(document.measure)},
        )
    edges = np.array([[e.i, e.j] for e in document.edges], dtype=np.int64).reshape(-1, 2)
    if edges.size and edges.max() >= document.vertices:
        raise SpaceConstructionError("edge refers to a missing vertex", details={"max_id": int(edges.max())})

    meta = document.metadata
    return DiscreteSpace.from_edges(
        name=document.name,
        measure=np.array(document.measure),
        edges=edges,
        lengths=np.array([e.len for e in document.edges]),
        conductances=np.array([e.weight for e in document.edges]),
        metadata=SpaceMetadata(meta.K, meta.N, meta.n, meta.D),
        coordinates=None if document.coordinates is None else np.array(document.coordinates),
    )


def dumps_space(space: DiscreteSpace) -> str:
    """Serialize a space to a JSON string."""
    return json.dumps(to_document(space).model_dump(), indent=2, sort_keys=True)


def loads_space(text: str) -> DiscreteSpace:
    """Parse a space from a JSON string.

    Raises:
        SpaceConstructionError: If the document is malformed
    """
    try:
        document = SpaceDocument.model_validate(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as e:
        raise SpaceConstructionError(f"invalid space document: {e}") from e
    return from_document(document)


def dump_space(space: DiscreteSpace, path: Path) -> None:
    """Write a space to ``path``."""
    Path(path).write_text(dumps_space(space))


def load_space(path: Path) -> DiscreteSpace:
    """Read a space from ``path``."""
    return loads_space(Path(path).read_text())
