"""Shared fixtures and strategies for the chordflow test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from chordflow.support_geometry import (
    AngleGrid,
    SupportFunction,
    disk,
    ellipse,
    fourier_body,
)

GAUSS_HALF = 1.0 - np.exp(-0.5)  # 1 - e^{-1/2}
DISK1_VOLUME = 2.0 * np.pi * GAUSS_HALF  # gaussian volume of the unit disk
DISK1_BOUNDARY_V = 2.0 * np.exp(-0.5) * DISK1_VOLUME  # chord potential on its boundary


@pytest.fixture(scope="session")
def grid() -> AngleGrid:
    return AngleGrid(256)


@pytest.fixture(scope="session")
def grid64() -> AngleGrid:
    return AngleGrid(64)


@pytest.fixture(scope="session")
def unit_disk(grid) -> SupportFunction:
    return disk(1.0, grid)


@pytest.fixture(scope="session")
def disk2(grid) -> SupportFunction:
    return disk(2.0, grid)


@pytest.fixture(scope="session")
def ellipse21(grid) -> SupportFunction:
    return ellipse(2.0, 1.0, grid)


@pytest.fixture(scope="session")
def fourier01(grid) -> SupportFunction:
    return fourier_body([0.1], 1.0, grid)


def build_safe_body(grid: AngleGrid, weights, margin: float) -> SupportFunction:
    """Fourier body that is convex and positive for any weights in [-1, 1].

    The k-th cosine coefficient is scaled by margin / (2k)^2 after
    normalizing the weight vector, which keeps the principal radius
    bounded below by 1 - margin.
    """
    w = np.asarray(weights, dtype=float)
    scale = max(1.0, np.abs(w).sum())
    coeffs = {k + 1: margin * w[k] / (scale * (2 * (k + 1)) ** 2) for k in range(w.size)}
    return fourier_body(coeffs, 1.0, grid)


unit_weights = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
body_weights = st.tuples(unit_weights, unit_weights, unit_weights)
body_margins = st.floats(min_value=0.05, max_value=0.8, allow_nan=False)
