"""Artifact repository for one experiment run.

Every artifact carries the config hash, seed and producing stage: JSON files
in an envelope, columnar files in a leading comment line.
"""

import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from tiresias.errors import ArtifactError
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="ArtifactRepository")

COMMENT = "#"


def to_jsonable(value: Any) -> Any:
    """Convert numpy containers and scalars into plain JSON types."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


class ArtifactRepository:
    """Read and write the artifact tree of a run.

    Example:
        >>> repo = ArtifactRepository(Path("runs/abc"), config_hash="abc", seed=0)
        >>> repo.write_json("summary.json", {"rows": []}, stage="summary")
        >>> repo.read_json("summary.json")
    """

    def __init__(
        self,
        root: Path,
        config_hash: str = "",
        seed: int = 0,
        float_format: str = "%.17g",
    ) -> None:
        """Initialize the repository.

        Args:
            root: Run directory (created on first write)
            config_hash: Hash embedded in every artifact
            seed: Seed embedded in every artifact
            float_format: Float format of columnar files
        """
        self.root = Path(root)
        self.config_hash = config_hash
        self.seed = seed
        self.float_format = float_format
        self._logger = logger

    def path(self, name: str) -> Path:
        """Location of artifact ``name``."""
        return self.root / name

    def exists(self, name: str) -> bool:
        """Whether artifact ``name`` has been written."""
        return self.path(name).is_file()

    def _prepare(self, name: str) -> Path:
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def _provenance(self, stage: str) -> dict[str, Any]:
        return {"config_hash": self.config_hash, "seed": self.seed, "stage": stage}

    def write_json(self, name: str, payload: Any, stage: str) -> Path:
        """Write ``payload`` inside a provenance envelope (sorted keys, repr floats)."""
        target = self._prepare(name)
        document = {"provenance": self._provenance(stage), "data": to_jsonable(payload)}
        target.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
        self._logger.debug("artifact_written", name=name, stage=stage)
        return target

    def read_json(self, name: str) -> Any:
        """Payload of a JSON artifact.

        Raises:
            ArtifactError: If the artifact is missing
        """
        if not self.exists(name):
            raise ArtifactError("artifact missing", details={"name": name, "root": str(self.root)})
        return json.loads(self.path(name).read_text())["data"]

    def read_provenance(self, name: str) -> dict[str, Any]:
        """Provenance of a JSON or columnar artifact."""
        if not self.exists(name):
            raise ArtifactError("artifact missing", details={"name": name, "root": str(self.root)})
        text = self.path(name).read_text()
        if name.endswith(".json"):
            result: dict[str, Any] = json.loads(text)["provenance"]
            return result
        header = text.splitlines()[0].lstrip(COMMENT).split()
        return dict(item.split("=", 1) for item in header)

    def write_table(self, name: str, frame: pd.DataFrame, stage: str) -> Path:
        """Write a columnar table with a provenance comment line."""
        target = self._prepare(name)
        provenance = " ".join(f"{k}={v}" for k, v in self._provenance(stage).items())
        with open(target, "w") as f:
            f.write(f"{COMMENT} {provenance}\n")
            frame.to_csv(f, index=False, float_format=self.float_format, lineterminator="\n")
        self._logger.debug("artifact_written", name=name, stage=stage, rows=len(frame))
        return target

    def read_table(self, name: str) -> pd.DataFrame:
        """Read a columnar table.

        Raises:
            ArtifactError: If the artifact is missing
        """
        if not self.exists(name):
            raise ArtifactError("artifact missing", details={"name": name, "root": str(self.root)})
        return pd.read_csv(self.path(name), comment=COMMENT)
