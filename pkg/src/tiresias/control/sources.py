"""Indicator × time-hat source basis for Boundary Control."""

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from tiresias.errors import ControlError
from tiresias.wave.kernels import ramp_kernel
from tiresias.wave.models import TimeSource, WindowModes


@dataclass(frozen=True)
class ControlBasis:
    """Sources 𝟙_x(·) h_k(τ) for x in a generating set U ⊆ V.

    h_k is the piecewise-linear hat centred at τ_k = kΔ, k = 1..K−1, with
    K = ⌈s/Δ⌉ so every hat is supported in [0, s].

    Attributes:
        generators: Global vertex ids of U
        horizon: Control time s
        time_step: Target hat spacing Δ (shrunk so that K·Δ = s)
    """

    generators: tuple[int, ...]
    horizon: float
    time_step: float

    def __post_init__(self) -> None:
        if not self.generators:
            raise ValueError("control basis needs at least one generator")
        if self.time_step <= 0:
            raise ValueError("time_step must be positive")

    @property
    def hat_count(self) -> int:
        """Number of interior hats K − 1 (0 when s ≤ 0)."""
        if self.horizon <= 0:
            return 0
        return max(int(np.ceil(self.horizon / self.time_step - 1e-9)), 2) - 1

    @property
    def spacing(self) -> float:
        """Actual hat spacing s / K."""
        return self.horizon / (self.hat_count + 1) if self.hat_count else 0.0

    @property
    def size(self) -> int:
        """Number of sources |U|·(K − 1)."""
        return len(self.generators) * self.hat_count

    def centres(self) -> np.ndarray:
        """Hat centres τ_1..τ_{K−1}."""
        return self.spacing * np.arange(1, self.hat_count + 1)

    def refined(self) -> "ControlBasis":
        """Same generators and horizon with half the hat spacing."""
        return ControlBasis(self.generators, self.horizon, self.time_step / 2.0)

    def modal_matrix(self, modes: WindowModes) -> np.ndarray:
        """Rows u^f(s) in modal coordinates for every basis source.

        Row (x, k), column j equals m_x φ_j(x) (K_3(s−τ_{k−1}) − 2K_3(s−τ_k)
        + K_3(s−τ_{k+1}))/Δ, the exact Duhamel integral of the hat.

        Raises:
            ControlError: If a generator lies outside the window
        """
        lam = np.asarray(modes.eigenvalues, dtype=float)
        if self.hat_count == 0:
            return np.zeros((0, lam.size))

        position = {int(v): i for i, v in enumerate(modes.vertices)}
        missing = [v for v in self.generators if v not in position]
        if missing:
            raise ControlError("generator outside the window", details={"vertex": missing[0]})
        index = np.array([position[v] for v in self.generators], dtype=np.int64)

        delta = self.spacing
        tau = self.centres()
        delays = self.horizon - tau
        second_difference = (
            ramp_kernel(3, lam[None, :], delays[:, None] + delta)
            - 2.0 * ramp_kernel(3, lam[None, :], delays[:, None])
            + ramp_kernel(3, lam[None, :], delays[:, None] - delta)
        ) / delta
        spatial = modes.eigenfunctions[:, index].T * modes.measure_on_V[index][:, None]
        rows = spatial[:, None, :] * second_difference[None, :, :]
        result: np.ndarray = rows.reshape(self.size, lam.size)
        return result

    def sources(self) -> Iterator[TimeSource]:
        """Each basis source as a TimeSource, in modal-matrix row order."""
        delta = self.spacing
        nodes = delta * np.arange(self.hat_count + 2)
        for vertex in self.generators:
            for k in range(1, self.hat_count + 1):
                values = np.zeros((nodes.size, 1))
                values[k, 0] = 1.0
                yield TimeSource(np.array([vertex], dtype=np.int64), nodes, values)


def generators_near(
    modes: WindowModes, distance: np.ndarray, centre: int, radius: float
) -> tuple[int, ...]:
    """Window vertices within ``radius`` of the window vertex ``centre``.

    Args:
        modes: Window data (for the vertex ids)
        distance: Window metric, indexed by window position
        centre: Global id of the centre
        radius: Ball radius (the centre is always included)
    """
    vertices = np.asarray(modes.vertices)
    hits = np.flatnonzero(vertices == centre)
    if hits.size == 0:
        raise ControlError("centre outside the window", details={"vertex": centre})
    inside = distance[int(hits[0])] <= radius
    return tuple(int(v) for v in vertices[inside])
