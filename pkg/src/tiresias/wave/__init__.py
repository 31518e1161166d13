"""Modal wave solver, finite-propagation diagnostics and the control map."""

from tiresias.wave.kernels import (
    duhamel_kernel,
    piecewise_linear_duhamel,
    ramp_kernel,
    sine_kernel,
)
from tiresias.wave.models import TimeSource, WaveProblem, WaveSolution, WindowModes
from tiresias.wave.propagation import (
    ConeEnergyRecord,
    PropagationCase,
    PropagationReport,
    circle_pulse_case,
    cone_energy,
    finite_propagation_diagnostic,
    interval_pulse_case,
    propagation_study,
)
from tiresias.wave.solver import energy_constant, solve_wave, source_to_coefficients

__all__ = [
    "ConeEnergyRecord",
    "PropagationCase",
    "PropagationReport",
    "TimeSource",
    "WaveProblem",
    "WaveSolution",
    "WindowModes",
    "circle_pulse_case",
    "cone_energy",
    "duhamel_kernel",
    "energy_constant",
    "finite_propagation_diagnostic",
    "interval_pulse_case",
    "piecewise_linear_duhamel",
    "propagation_study",
    "ramp_kernel",
    "sine_kernel",
    "solve_wave",
    "source_to_coefficients",
]
