"""Artifact persistence for experiment runs.

Runs write JSON documents and columnar text tables under one directory;
plot-ready files are derived from them afterwards.
"""

from tiresias.storage.plots import emit_plots, expected_artifacts
from tiresias.storage.repository import ArtifactRepository, to_jsonable

__all__ = ["ArtifactRepository", "emit_plots", "expected_artifacts", "to_jsonable"]
