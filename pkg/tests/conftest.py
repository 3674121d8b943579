"""Shared fixtures and hypothesis profile for the test suite."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cqlab import ActionField, GridSpec, PhysicalParams, QStochasticState, normalized_density

settings.register_profile(
    "ci",
    deadline=None,
    max_examples=20,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture
def grid1d() -> GridSpec:
    return GridSpec.line(16.0, 128, -8.0)


@pytest.fixture
def grid2d() -> GridSpec:
    return GridSpec.square(12.0, 48, -6.0)


@pytest.fixture
def params() -> PhysicalParams:
    return PhysicalParams(hbar=1.0, mass=1.0)


def gaussian_state(
    grid: GridSpec, sigma: float = 1.0, center: float = 0.0, slope: float = 0.0, chirp: float = 0.0
) -> QStochasticState:
    """1D Gaussian density with a quadratic action; shared test fixture."""
    x = grid.axis(0)
    n = normalized_density(grid, np.exp(-((x - center) ** 2) / (2.0 * sigma**2)))
    S = ActionField.from_parts(
        grid,
        quad=np.array([[chirp]]),
        lin=np.array([slope - chirp * center]),
        const=0.5 * chirp * center**2,
    )
    return QStochasticState(n, S, 0.0)


def trig_density_state(
    grid: GridSpec, amp: float = 0.6, shift: float = 1.1, winding: int = 0, hbar: float = 1.0
) -> QStochasticState:
    """Nowhere-vanishing periodic density with a box-commensurate slope."""
    x = grid.axis(0)
    L = grid.extents[0]
    n = normalized_density(grid, np.exp(amp * np.cos(2.0 * np.pi * (x - shift) / L)))
    S = ActionField.from_parts(grid, lin=np.array([2.0 * np.pi * hbar * winding / L]))
    return QStochasticState(n, S, 0.0)
