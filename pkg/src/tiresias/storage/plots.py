"""Plot-ready columnar files derived from the artifact tree.

Rendering happens outside the package; each file here is a tidy table.
"""

from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from tiresias.errors import ArtifactError
from tiresias.storage.repository import ArtifactRepository
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="PlotEmitter")

PLOT_DIR = "plots"


def _trace_decay(frame: pd.DataFrame) -> pd.DataFrame:
    out = frame[["t", "trace", "fitted"]].copy()
    out["residual"] = out["trace"] - out["fitted"]
    return out


def _varadhan_fits(frame: pd.DataFrame) -> pd.DataFrame:
    return frame.sort_values(["p", "q", "t"], ignore_index=True)


def _cone_energy(frame: pd.DataFrame) -> pd.DataFrame:
    out = frame.sort_values("vertices", ignore_index=True)
    out["level"] = np.arange(len(out))
    return out[["level", "vertices", "mesh_size", "cone_energy", "fraction"]]


def _epsilon_ladder(frame: pd.DataFrame) -> pd.DataFrame:
    return frame.sort_values("magnitude", ignore_index=True)


def _eigenvalue_errors(frame: pd.DataFrame) -> pd.DataFrame:
    out = frame[["mode", "recovered", "true"]].copy()
    out["relative_error"] = np.abs(out["recovered"] - out["true"]) / np.maximum(
        np.abs(out["true"]), 1e-300
    )
    return out


@dataclass(frozen=True)
class PlotSpec:
    """One plot file and the artifact it derives from."""

    source: str
    target: str
    derive: Callable[[pd.DataFrame], pd.DataFrame]


PLOTS = (
    PlotSpec("trace.csv", "trace_decay.csv", _trace_decay),
    PlotSpec("varadhan.csv", "varadhan_fits.csv", _varadhan_fits),
    PlotSpec("cone_energy.csv", "cone_energy.csv", _cone_energy),
    PlotSpec("ladder.csv", "epsilon_ladder.csv", _epsilon_ladder),
    PlotSpec("eigen_errors.csv", "eigenvalue_errors.csv", _eigenvalue_errors),
)


def expected_artifacts() -> list[str]:
    """Source artifacts the emitter knows about."""
    return [plot.source for plot in PLOTS]


def emit_plots(repository: ArtifactRepository, strict: bool = False) -> list[Path]:
    """Write every plot file whose source artifact exists.

    Args:
        repository: Run directory
        strict: Fail when any source artifact is missing

    Returns:
        Paths of the written plot files

    Raises:
        ArtifactError: If no source exists, or any is missing under ``strict``
    """
    missing = [plot.source for plot in PLOTS if not repository.exists(plot.source)]
    if len(missing) == len(PLOTS) or (strict and missing):
        logger.error("plot_sources_missing", missing=missing, root=str(repository.root))
        raise ArtifactError(
            "plot source artifacts missing",
            details={"missing": missing, "expected": expected_artifacts()},
        )

    written = []
    for plot in PLOTS:
        if plot.source in missing:
            logger.warning("plot_skipped", source=plot.source)
            continue
        frame = plot.derive(repository.read_table(plot.source))
        written.append(repository.write_table(f"{PLOT_DIR}/{plot.target}", frame, stage="plots"))
    logger.info("plots_emitted", count=len(written), skipped=len(missing))
    return written
