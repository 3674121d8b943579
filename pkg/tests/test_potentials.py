"""External potential tables: values, gradients, and validation."""

import numpy as np
import pytest

from cqlab import GridSpec, PotentialSpec, RealField, ValidationError


@pytest.fixture
def grid():
    return GridSpec.line(16.0, 128, -8.0)


def test_free_potential_is_zero(grid):
    pot = PotentialSpec.free(1)
    assert pot.static
    assert not pot.has_vector
    assert np.all(pot.values_on(grid, 0.0).samples == 0.0)
    assert np.all(pot.gradient_on(grid, 0.0)[0] == 0.0)


def test_uniform_field_values_and_gradient(grid):
    pot = PotentialSpec.uniform_field([0.7])
    x = grid.axis(0)
    assert np.max(np.abs(pot.values_on(grid, 0.0).samples - 0.7 * x)) < 1e-12
    assert np.max(np.abs(pot.gradient_on(grid, 0.0)[0] - 0.7)) < 1e-14
    pts = np.array([-3.3, 0.0, 5.21])
    assert np.max(np.abs(pot.gradient_at(pts, 0.0) - 0.7)) < 1e-14


def test_harmonic_values_and_gradient_2d():
    grid = GridSpec.square(12.0, 48, -6.0)
    pot = PotentialSpec.harmonic(1.5, [0.5, -0.25], mass=2.0)
    xx, yy = grid.meshes()
    expected = 0.5 * 2.0 * 1.5**2 * ((xx - 0.5) ** 2 + (yy + 0.25) ** 2)
    assert np.max(np.abs(pot.values_on(grid, 0.0).samples - expected)) < 1e-10
    gx = pot.gradient_on(grid, 0.0)[0]
    assert np.max(np.abs(gx - 2.0 * 1.5**2 * (xx - 0.5))) < 1e-10
    assert pot.confining
    assert not PotentialSpec.uniform_field([1.0]).confining


def test_table_potential_round_trip(grid):
    x = grid.axis(0)
    k = 2.0 * np.pi / 16.0
    table = RealField(grid, np.cos(k * x))
    pot = PotentialSpec.from_table(table)
    assert np.max(np.abs(pot.values_on(grid, 0.0).samples - table.samples)) < 1e-14
    # grid gradient is spectral
    assert np.max(np.abs(pot.gradient_on(grid, 0.0)[0] + k * np.sin(k * x))) < 1e-11
    # off-grid gradient goes through the cubic interpolant
    pts = np.array([-5.3, 0.11, 2.718])
    assert np.max(np.abs(pot.gradient_at(pts, 0.0) + k * np.sin(k * pts))) < 1e-6


def test_table_potential_rejects_foreign_grid(grid):
    table = RealField(grid, np.zeros(grid.shape))
    pot = PotentialSpec.from_table(table)
    other = GridSpec.line(16.0, 64, -8.0)
    with pytest.raises(ValidationError):
        pot.values_on(other, 0.0)


def test_with_extra_scalar_and_vector(grid):
    x = grid.axis(0)
    k = 2.0 * np.pi / 16.0
    pot = PotentialSpec.harmonic(1.0, 0.0)
    extra = 0.2 * np.sin(k * x)
    vec = 0.1 * np.cos(k * x)
    combo = pot.with_extra(
        "harmonic+gauge",
        extra_periodic=lambda g, t: extra,
        extra_vector=lambda g, t: (vec,),
    )
    base = pot.values_on(grid, 0.0).samples
    assert np.max(np.abs(combo.values_on(grid, 0.0).samples - base - extra)) < 1e-14
    assert combo.has_vector
    assert np.max(np.abs(combo.vector_values(grid, 0.0)[0] - vec)) < 1e-14
    # stacking a second contribution adds, not replaces
    again = combo.with_extra("twice", extra_periodic=lambda g, t: extra)
    assert np.max(np.abs(again.values_on(grid, 0.0).samples - base - 2 * extra)) < 1e-14


def test_quad_matrix_validation():
    with pytest.raises(ValidationError):
        PotentialSpec("bad", 2, np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2))
    with pytest.raises(ValidationError):
        PotentialSpec("bad", 2, np.eye(2), np.zeros(3))
