"""Grid construction and spectral calculus on the periodic box."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqlab import (
    ComplexField,
    GridSpec,
    RealField,
    ValidationError,
    fourier_shift,
    from_momentum_space,
    integrate,
    spectral_gradient,
    spectral_laplacian,
    to_momentum_space,
)
from cqlab.core import edge_mass_fraction, periodic_interpolator


def test_line_grid_layout():
    g = GridSpec.line(16.0, 128, -8.0)
    assert g.dims == 1
    assert g.shape == (128,)
    assert g.spacings[0] == pytest.approx(0.125)
    assert g.cell_volume == pytest.approx(0.125)
    x = g.axis(0)
    assert x[0] == -8.0
    assert x[-1] == pytest.approx(8.0 - 0.125)


def test_square_grid_layout():
    g = GridSpec.square(12.0, 48, -6.0)
    assert g.dims == 2
    assert g.shape == (48, 48)
    assert g.node_count == 48 * 48
    assert g.cell_volume == pytest.approx(0.25 * 0.25)


def test_momentum_grid_is_conjugate():
    hbar = 0.5
    g = GridSpec.line(16.0, 128, -8.0)
    pg = g.momentum_grid(hbar)
    dp = 2.0 * np.pi * hbar / 16.0
    assert pg.spacings[0] == pytest.approx(dp)
    assert pg.origins[0] == pytest.approx(-(128 // 2) * dp)
    assert pg.extents[0] == pytest.approx(128 * dp)


def test_integrate_picks_up_dc_component():
    g = GridSpec.line(10.0, 64, -5.0)
    x = g.axis(0)
    f = RealField(g, 3.0 + np.cos(2.0 * np.pi * x / 10.0))
    assert integrate(f) == pytest.approx(30.0, abs=1e-12)


def test_spectral_gradient_matches_trig_derivative():
    g = GridSpec.line(16.0, 128, -8.0)
    x = g.axis(0)
    k = 2.0 * np.pi * 3.0 / 16.0
    f = RealField(g, np.sin(k * x))
    df = spectral_gradient(f, 0)
    assert np.max(np.abs(df.samples - k * np.cos(k * x))) < 1e-12


def test_spectral_laplacian_2d():
    g = GridSpec.square(12.0, 48, -6.0)
    xx, yy = g.meshes()
    kx = 2.0 * np.pi * 2.0 / 12.0
    ky = 2.0 * np.pi * 1.0 / 12.0
    f = RealField(g, np.cos(kx * xx) * np.sin(ky * yy))
    lap = spectral_laplacian(f)
    expected = -(kx**2 + ky**2) * f.samples
    assert np.max(np.abs(lap.samples - expected)) < 1e-11


def test_odd_derivative_drops_nyquist_mode():
    g = GridSpec.line(16.0, 128, -8.0)
    x = g.axis(0)
    nyquist = np.cos(np.pi * x / g.spacings[0])
    df = spectral_gradient(RealField(g, nyquist), 0)
    assert np.max(np.abs(df.samples)) < 1e-10


@given(
    st.lists(st.floats(-1.0, 1.0), min_size=6, max_size=6),
    st.lists(st.floats(-1.0, 1.0), min_size=6, max_size=6),
)
def test_parseval_identity(re_coeffs, im_coeffs):
    g = GridSpec.line(16.0, 64, -8.0)
    x = g.axis(0)
    vals = np.zeros(64, dtype=np.complex128)
    for j, (a, b) in enumerate(zip(re_coeffs, im_coeffs), start=1):
        vals += (a + 1j * b) * np.exp(2j * np.pi * j * x / 16.0)
    vals += 0.3
    psi = ComplexField(g, vals)
    hat = to_momentum_space(psi, hbar=1.0)
    lhs = float(np.sum(np.abs(psi.samples) ** 2) * g.cell_volume)
    rhs = float(np.sum(np.abs(hat.samples) ** 2) * hat.grid.cell_volume)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_momentum_space_round_trip():
    g = GridSpec.line(16.0, 128, -8.0)
    x = g.axis(0)
    psi = ComplexField(g, np.exp(-(x**2)) * np.exp(0.5j * x))
    back = from_momentum_space(to_momentum_space(psi, 0.7), g, 0.7)
    assert np.max(np.abs(back.samples - psi.samples)) < 1e-12


def test_momentum_convention_plane_wave_peak():
    # exp(i k0 x) with k0 on the momentum lattice concentrates at p = hbar k0
    hbar = 0.5
    g = GridSpec.line(16.0, 128, -8.0)
    x = g.axis(0)
    k0 = 2.0 * np.pi * 5.0 / 16.0
    psi = ComplexField(g, np.exp(1j * k0 * x) / np.sqrt(16.0))
    hat = to_momentum_space(psi, hbar)
    dens = np.abs(hat.samples) ** 2
    peak = hat.grid.axis(0)[int(np.argmax(dens))]
    assert peak == pytest.approx(hbar * k0, abs=1e-12)


def test_fourier_shift_matches_roll_on_whole_cells():
    g = GridSpec.line(16.0, 128, -8.0)
    x = g.axis(0)
    f = RealField(g, np.exp(np.cos(2.0 * np.pi * x / 16.0)))
    shifted = fourier_shift(f, [3 * g.spacings[0]])
    assert np.max(np.abs(shifted.samples - np.roll(f.samples, 3))) < 1e-12


def test_fourier_shift_fractional_cells():
    g = GridSpec.line(16.0, 128, -8.0)
    x = g.axis(0)
    f = RealField(g, np.cos(2.0 * np.pi * x / 16.0))
    s = 0.3
    shifted = fourier_shift(f, [s])
    assert np.max(np.abs(shifted.samples - np.cos(2.0 * np.pi * (x - s) / 16.0))) < 1e-12


def test_periodic_interpolator_hits_trig_off_grid():
    # cubic spline: O(spacing^4) accuracy, here ~(k dx)^4 ~ 1e-7
    g = GridSpec.line(16.0, 128, -8.0)
    x = g.axis(0)
    f = RealField(g, np.sin(2.0 * np.pi * 2.0 * x / 16.0))
    interp = periodic_interpolator(f)
    pts = np.array([-7.93, -1.234, 0.017, 5.5551])
    assert np.max(np.abs(interp(pts) - np.sin(2.0 * np.pi * 2.0 * pts / 16.0))) < 1e-6
    on_nodes = interp(x[::7])
    assert np.max(np.abs(on_nodes - f.samples[::7])) < 1e-12


def test_edge_mass_fraction_flags_boundary_mass():
    g = GridSpec.line(16.0, 128, -8.0)
    x = g.axis(0)
    centered = RealField(g, np.exp(-(x**2)))
    shifted = RealField(g, np.exp(-((x - 7.9) ** 2)))
    assert edge_mass_fraction(centered) < 1e-12
    assert edge_mass_fraction(shifted) > 1e-3


def test_field_grid_mismatch_rejected():
    g = GridSpec.line(16.0, 128, -8.0)
    with pytest.raises(ValidationError):
        RealField(g, np.zeros(64))


def test_grid_validation():
    with pytest.raises(ValidationError):
        GridSpec.line(-1.0, 64, 0.0)
    with pytest.raises(ValidationError):
        GridSpec.line(10.0, 3, 0.0)
