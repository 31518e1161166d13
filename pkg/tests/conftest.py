"""
Shared fixtures: a small circle, its spectrum and a quarter-arc observation.
"""

import numpy as np
import pytest
from tiresias.mms import arc_window, build_circle
from tiresias.spectral import eigensolve, geometric_grid, sample_observation


@pytest.fixture(scope="session")
def circle32():
    """Circle of radius 1 discretized with 32 vertices."""
    return build_circle(32)


@pytest.fixture(scope="session")
def circle32_spectrum(circle32):
    """Full spectrum of the 32-vertex circle."""
    return eigensolve(circle32)


@pytest.fixture(scope="session")
def quarter_window(circle32):
    """First quarter of the circle, vertices 0..7."""
    return arc_window(circle32, 0, 8)


@pytest.fixture(scope="session")
def quarter_observation(circle32, circle32_spectrum, quarter_window):
    """Noise-free heat samples on the quarter window."""
    grid = geometric_grid(0.05, 20.0, 16)
    return sample_observation(circle32_spectrum, circle32, quarter_window, grid)


@pytest.fixture
def rng():
    """Seeded generator for tests that draw random data."""
    return np.random.default_rng(7)
