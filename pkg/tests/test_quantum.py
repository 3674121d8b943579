"""Split-step propagation, stationary states, and residual diagnostics."""

import numpy as np
import pytest

from cqlab import (
    GridSpec,
    Observable,
    PhysicalParams,
    PotentialSpec,
    ValidationError,
    WaveFunction,
    classical_wave_residual,
    evolve_q_state,
    expect_quantum,
    integrate,
    madelung_forward,
    nlse_residual,
    nonlinear_coupling,
    split_step_propagate,
    stationary_state,
    wavefunction_time_stencil,
)

from conftest import trig_density_state


def _gaussian_wave(grid, params, sigma, center=0.0, slope=0.0):
    x = grid.axis(0)
    vals = np.exp(-((x - center) ** 2) / (4.0 * sigma**2) + 1j * slope * x / params.hbar)
    return WaveFunction.normalized(grid, vals, params)


def _free_packet_exact(grid, params, sigma, center, slope, t):
    # closed-form free evolution of a Gaussian packet, normalized on the line
    x = grid.axis(0)
    hb, m = params.hbar, params.mass
    s_t = sigma * np.sqrt(1.0 + (1j * hb * t) / (2.0 * m * sigma**2))
    xc = center + slope * t / m
    vals = (
        (2.0 * np.pi) ** (-0.25)
        * np.sqrt(sigma / s_t**2) * np.sqrt(s_t / np.abs(s_t))
        * np.exp(
            -((x - xc) ** 2) / (4.0 * s_t**2)
            + 1j * (slope * (x - xc) + 0.5 * slope**2 * t / m) / hb
        )
    )
    return vals / np.sqrt(np.sum(np.abs(vals) ** 2) * grid.cell_volume)


def test_free_packet_matches_closed_form(params):
    grid = GridSpec.line(40.0, 512, -20.0)
    psi = _gaussian_wave(grid, params, sigma=1.0, center=-3.0, slope=0.8)
    out = split_step_propagate(psi, PotentialSpec.free(1), params, dt=2e-3, steps=1000)
    exact = _free_packet_exact(grid, params, 1.0, -3.0, 0.8, out.time)
    # global phase is not fixed by the propagator; compare up to one phasor
    overlap = np.sum(np.conj(exact) * out.samples) * grid.cell_volume
    assert abs(abs(overlap) - 1.0) < 1e-10
    aligned = out.samples * np.conj(overlap) / abs(overlap)
    assert np.max(np.abs(aligned - exact)) < 1e-8


def test_coherent_packet_center_oscillates(params):
    grid = GridSpec.line(24.0, 256, -12.0)
    omega = 1.0
    sigma = np.sqrt(params.hbar / (2.0 * params.mass * omega))
    psi = _gaussian_wave(grid, params, sigma=sigma, center=1.2)
    pot = PotentialSpec.harmonic(omega, 0.0)
    steps = 2000
    dt = 0.5 * np.pi / (omega * steps)  # quarter period
    out = split_step_propagate(psi, pot, params, dt, steps)
    mean_q = expect_quantum(out, Observable.position(0), params)
    mean_p = expect_quantum(out, Observable.momentum(0), params)
    assert mean_q == pytest.approx(0.0, abs=1e-7)
    assert mean_p == pytest.approx(-1.2, abs=1e-7)
    assert abs(integrate(out.density()) - 1.0) < 1e-12


def test_energy_conserved_by_split_step(params):
    grid = GridSpec.line(24.0, 256, -12.0)
    pot = PotentialSpec.harmonic(1.0, 0.0)
    psi = _gaussian_wave(grid, params, sigma=0.9, center=0.7, slope=-0.4)
    e0 = expect_quantum(psi, Observable.energy(), params, pot)
    out = split_step_propagate(psi, pot, params, dt=1e-3, steps=4000)
    e1 = expect_quantum(out, Observable.energy(), params, pot)
    assert abs(e1 - e0) / abs(e0) < 1e-6


def test_large_phase_step_warns(params):
    grid = GridSpec.line(24.0, 256, -12.0)
    pot = PotentialSpec.harmonic(3.0, 0.0)
    psi = _gaussian_wave(grid, params, sigma=0.8)
    with pytest.warns(UserWarning, match="phase"):
        split_step_propagate(psi, pot, params, dt=0.05, steps=1)


def test_time_reversal_recovers_initial(params):
    grid = GridSpec.line(24.0, 256, -12.0)
    pot = PotentialSpec.harmonic(1.0, 0.2)
    psi = _gaussian_wave(grid, params, sigma=1.0, center=0.5, slope=0.3)
    fwd = split_step_propagate(psi, pot, params, dt=1e-3, steps=500)
    back = split_step_propagate(fwd, pot, params, dt=-1e-3, steps=500)
    assert np.max(np.abs(back.samples - psi.samples)) < 1e-9


def test_nonlinear_coupling_value():
    params = PhysicalParams(hbar=0.8, mass=2.0, beta=1.5)
    assert nonlinear_coupling(params) == pytest.approx(5 * 1.5**2 * 0.8**2 / (24 * 2.0))


def test_ground_state_energy_harmonic(params):
    grid = GridSpec.line(20.0, 128, -10.0)
    omega = 1.0
    pot = PotentialSpec.harmonic(omega, 0.0)
    psi0 = stationary_state(pot, params, grid, level=0)
    e0 = expect_quantum(psi0, Observable.energy(), params, pot)
    assert e0 == pytest.approx(0.5 * params.hbar * omega, abs=1e-7)
    # profile matches the analytic Gaussian up to a global phase
    x = grid.axis(0)
    exact = (params.mass * omega / (np.pi * params.hbar)) ** 0.25 * np.exp(
        -params.mass * omega * x**2 / (2.0 * params.hbar)
    )
    overlap = np.abs(np.sum(np.conj(exact) * psi0.samples) * grid.cell_volume)
    assert overlap == pytest.approx(1.0, abs=1e-8)


def test_excited_state_energy_and_orthogonality(params):
    grid = GridSpec.line(20.0, 128, -10.0)
    pot = PotentialSpec.harmonic(1.0, 0.0)
    psi0 = stationary_state(pot, params, grid, level=0)
    psi1 = stationary_state(pot, params, grid, level=1)
    e1 = expect_quantum(psi1, Observable.energy(), params, pot)
    assert e1 == pytest.approx(1.5 * params.hbar, abs=1e-6)
    overlap = np.abs(np.sum(np.conj(psi0.samples) * psi1.samples) * grid.cell_volume)
    assert overlap < 1e-7


def test_stationary_state_rejects_nonlinear_relaxation():
    grid = GridSpec.line(20.0, 128, -10.0)
    params = PhysicalParams(beta=1.0)
    with pytest.raises(ValidationError):
        stationary_state(PotentialSpec.harmonic(1.0, 0.0), params, grid)


def test_equation_residual_shrinks_quadratically(params):
    grid = GridSpec.line(24.0, 256, -12.0)
    pot = PotentialSpec.harmonic(1.0, 0.0)
    psi = _gaussian_wave(grid, params, sigma=1.0, center=0.8)

    def residual(dt):
        snaps = []
        split_step_propagate(psi, pot, params, dt, 2, snaps.append, stride=1)
        return nlse_residual(snaps, pot, params)

    r1 = residual(4e-3)
    r2 = residual(2e-3)
    assert 3.0 < r1 / r2 < 5.0


def test_residual_flags_wrong_potential(params):
    grid = GridSpec.line(24.0, 256, -12.0)
    pot = PotentialSpec.harmonic(1.0, 0.0)
    psi = _gaussian_wave(grid, params, sigma=1.0, center=0.8)
    snaps = []
    split_step_propagate(psi, pot, params, 1e-3, 2, snaps.append, stride=1)
    honest = nlse_residual(snaps, pot, params)
    lying = nlse_residual(snaps, PotentialSpec.harmonic(2.0, 0.0), params)
    assert lying > 100.0 * honest


def test_classically_mapped_wave_equation(params):
    # the polar image of an exactly transported classical pair solves the
    # linear wave equation with the amplitude-curvature feedback term
    grid = GridSpec.line(16.0, 256, -8.0)
    pot = PotentialSpec.free(1)
    st = trig_density_state(grid, winding=1, hbar=params.hbar)
    dt = 5e-4
    snaps = []
    with pytest.warns(UserWarning, match="boundary mass"):
        evolve_q_state(st, pot, params, dt, 2, snaps.append, stride=1)
    history = [madelung_forward(s, params) for s in snaps]
    r_classical = classical_wave_residual(history, pot, params)
    r_nlse = nlse_residual(history, pot, params)
    assert r_classical < 1e-5
    assert r_nlse > 10.0 * r_classical


def test_time_stencil_requires_uniform_history(params):
    grid = GridSpec.line(16.0, 128, -8.0)
    psi = _gaussian_wave(grid, params, sigma=1.0)
    pot = PotentialSpec.free(1)
    a = split_step_propagate(psi, pot, params, 1e-3, 10)
    b = split_step_propagate(a, pot, params, 1e-3, 10)
    stencil = wavefunction_time_stencil([psi, a, b])
    assert stencil.grid == grid
    c = split_step_propagate(b, pot, params, 1e-3, 7)
    with pytest.raises(ValidationError):
        wavefunction_time_stencil([a, b, c])
