"""Wavefunction evolution and stationary states on periodic grids.

The evolution equation is

    i hbar d_t psi = -(hbar^2/2m) lap psi + V psi
                     + (5 beta^2 hbar^2 / 24 m) |psi|^(4/3) psi

whose beta = 0 limit is the ordinary linear equation.  The nonlinear term is
the density derivative of the internal-noise energy (beta^2 hbar^2/8m) n^(5/3),
so split-step integration folds it into the potential phase exactly: the
phase factor leaves |psi| unchanged, making the nonlinearity constant during
the sub-step.

Vector potentials are rejected here; gauge-transform to an A = 0 frame
first.  Time-dependent scalar potentials are evaluated at the step midpoint.
"""

from __future__ import annotations

import warnings
from typing import Callable, Sequence

import numpy as np

from .bridge import WaveFunction
from .core import (
    ComplexField,
    GridSpec,
    PhysicalParams,
    RealField,
    integrate,
    spectral_laplacian,
)
from .errors import NonConvergenceError, UnsupportedPotentialError, ValidationError
from .potentials import PotentialSpec

__all__ = [
    "split_step_propagate",
    "stationary_state",
    "nlse_residual",
    "classical_wave_residual",
    "wavefunction_time_stencil",
    "nonlinear_coupling",
]

STATIONARY_DT_FACTOR = 0.1
STALL_WINDOW = 50
STALL_SHRINK = 0.999
ANNEAL_FLOOR = 1.0 / 16.0


def nonlinear_coupling(params: PhysicalParams) -> float:
    """Coefficient of |psi|^(4/3) psi in the evolution equation."""
    return 5.0 * params.beta**2 * params.hbar**2 / (24.0 * params.mass)


def _kinetic_symbol(grid: GridSpec) -> np.ndarray:
    k2 = np.zeros(grid.shape)
    for axis in range(grid.dims):
        k = grid.angular_wavenumbers(axis)
        shape = [1] * grid.dims
        shape[axis] = grid.points[axis]
        k2 = k2 + (k**2).reshape(shape)
    return k2


def _reject_unsupported(pot: PotentialSpec, grid: GridSpec) -> None:
    if pot.has_vector:
        raise UnsupportedPotentialError(
            "split-step evolution requires A = 0; gauge-transform to an A = 0 frame first"
        )
    if pot.dims != grid.dims:
        raise ValidationError("potential dimensionality does not match the grid")


def _effective_potential(
    v_ext: np.ndarray, samples: np.ndarray, coupling: float
) -> np.ndarray:
    if coupling == 0.0:
        return v_ext
    n = np.abs(samples) ** 2
    return v_ext + coupling * np.cbrt(n**2)


def split_step_propagate(
    psi: WaveFunction,
    pot: PotentialSpec,
    params: PhysicalParams,
    dt: float,
    steps: int,
    callback: Callable[[WaveFunction], None] | None = None,
    stride: int = 1,
) -> WaveFunction:
    """Strang splitting: half potential phase, full kinetic phase, half potential."""
    grid = psi.grid
    _reject_unsupported(pot, grid)
    if steps < 0:
        raise ValidationError("steps must be non-negative")
    coupling = nonlinear_coupling(params)
    kin_phase = np.exp(-1j * dt * params.hbar * _kinetic_symbol(grid) / (2.0 * params.mass))
    v_static = pot.values_on(grid, psi.time).samples if pot.static else None

    vals = psi.samples.copy()
    v_probe = v_static if v_static is not None else pot.values_on(grid, psi.time).samples
    max_phase = abs(dt) * float(np.abs(_effective_potential(v_probe, vals, coupling)).max())
    if max_phase > 0.25 * np.pi * params.hbar:
        warnings.warn(
            "potential phase per step exceeds pi/4; splitting error may dominate",
            stacklevel=2,
        )

    t = psi.time
    if callback is not None:
        callback(psi)
    for k in range(steps):
        v_ext = v_static if v_static is not None else pot.values_on(grid, t + dt / 2.0).samples
        half = np.exp(-0.5j * dt * _effective_potential(v_ext, vals, coupling) / params.hbar)
        vals = half * vals
        vals = np.fft.ifftn(kin_phase * np.fft.fftn(vals))
        half = np.exp(-0.5j * dt * _effective_potential(v_ext, vals, coupling) / params.hbar)
        vals = half * vals
        t = psi.time + (k + 1) * dt
        if callback is not None and (k + 1) % stride == 0:
            callback(WaveFunction(ComplexField(grid, vals), params, t))
    return WaveFunction(ComplexField(grid, vals), params, t)


# ---------------------------------------------------------------------------
# stationary states by imaginary-time relaxation


def _norm(vals: np.ndarray, cell: float) -> float:
    return float(np.sqrt(np.sum(np.abs(vals) ** 2) * cell))


def _project_out(vals: np.ndarray, basis: list[np.ndarray], cell: float) -> np.ndarray:
    for b in basis:
        vals = vals - (np.sum(np.conj(b) * vals) * cell) * b
    return vals


def _apply_hamiltonian(
    field: ComplexField, v_ext: np.ndarray, params: PhysicalParams, coupling: float
) -> np.ndarray:
    lap = spectral_laplacian(field).samples
    v_eff = _effective_potential(v_ext, field.samples, coupling)
    return -0.5 * params.hbar**2 / params.mass * lap + v_eff * field.samples


def _default_seed(grid: GridSpec, pot: PotentialSpec, level: int) -> np.ndarray:
    v = pot.values_on(grid, 0.0).samples
    center_idx = np.unravel_index(int(np.argmin(v)), grid.shape)
    coords = grid.meshes()
    out = np.ones(grid.shape)
    for axis in range(grid.dims):
        c = coords[axis][center_idx] if grid.dims > 1 else coords[axis][center_idx[0]]
        width = grid.extents[axis] / 10.0
        out = out * np.exp(-((coords[axis] - c) ** 2) / (2.0 * width**2))
        if axis == 0 and level > 0:
            out = out * (coords[axis] - c) ** level
    return out.astype(np.complex128)


def stationary_state(
    pot: PotentialSpec,
    params: PhysicalParams,
    grid: GridSpec,
    level: int = 0,
    tol: float = 1e-8,
    max_iter: int = 100000,
    initial: np.ndarray | None = None,
) -> WaveFunction:
    """Lowest or excited stationary state by annealed imaginary-time descent.

    Levels above 0 are found by keeping the iterate orthogonal to all lower
    states (recomputed internally).  The step starts at
    0.1 * min(spacing)^2 * m / hbar and halves whenever the eigenresidual
    stalls, down to 1/16 of the start value.
    """
    _reject_unsupported(pot, grid)
    if not pot.static:
        raise ValidationError("stationary states require a static potential")
    if params.beta != 0.0:
        raise ValidationError("stationary-state relaxation is defined for beta = 0 only")
    if level < 0:
        raise ValidationError("level must be non-negative")
    cell = grid.cell_volume
    coupling = nonlinear_coupling(params)
    v_ext = pot.values_on(grid, 0.0).samples
    k2 = _kinetic_symbol(grid)

    lower: list[np.ndarray] = []
    for lev in range(level):
        lower.append(
            stationary_state(pot, params, grid, lev, tol, max_iter).samples
        )

    if initial is not None:
        vals = np.asarray(initial, dtype=np.complex128)
        if vals.shape != grid.shape:
            raise ValidationError("initial guess shape does not match the grid")
        vals = vals.copy()
    else:
        vals = _default_seed(grid, pot, level)
    vals = _project_out(vals, lower, cell)
    nrm = _norm(vals, cell)
    if nrm < 1e-12:
        raise ValidationError("initial guess vanishes after deflation")
    vals /= nrm

    dt0 = STATIONARY_DT_FACTOR * min(grid.spacings) ** 2 * params.mass / params.hbar
    dt = dt0
    kin_decay = np.exp(-dt * params.hbar * k2 / (2.0 * params.mass))
    best = np.inf
    since_best = 0
    for iteration in range(1, max_iter + 1):
        v_eff = _effective_potential(v_ext, vals, coupling)
        vals = np.exp(-0.5 * dt * v_eff / params.hbar) * vals
        vals = np.fft.ifftn(kin_decay * np.fft.fftn(vals))
        v_eff = _effective_potential(v_ext, vals, coupling)
        vals = np.exp(-0.5 * dt * v_eff / params.hbar) * vals
        vals = _project_out(vals, lower, cell)
        vals /= _norm(vals, cell)

        field = ComplexField(grid, vals)
        h_vals = _apply_hamiltonian(field, v_ext, params, coupling)
        mu = float(np.real(np.sum(np.conj(vals) * h_vals)) * cell)
        residual = _norm(h_vals - mu * vals, cell)
        if residual < tol:
            return WaveFunction(field, params, 0.0)
        if residual < STALL_SHRINK * best:
            best = residual
            since_best = 0
        else:
            since_best += 1
            if since_best >= STALL_WINDOW and dt > ANNEAL_FLOOR * dt0:
                dt = max(dt / 2.0, ANNEAL_FLOOR * dt0)
                kin_decay = np.exp(-dt * params.hbar * k2 / (2.0 * params.mass))
                since_best = 0
    raise NonConvergenceError(
        f"imaginary-time iteration stopped at residual {residual:.3e} after {max_iter} steps",
        residual=residual,
        iterations=max_iter,
    )


# ---------------------------------------------------------------------------
# residual diagnostics


def wavefunction_time_stencil(trio: Sequence[WaveFunction]) -> ComplexField:
    """Centered-difference d_t psi from three equally spaced snapshots."""
    if len(trio) != 3:
        raise ValidationError("need exactly three snapshots")
    g = trio[0].grid
    if trio[1].grid != g or trio[2].grid != g:
        raise ValidationError("snapshots live on different grids")
    t0, t1, t2 = (w.time for w in trio)
    if t2 <= t0 or abs((t2 - t1) - (t1 - t0)) > 1e-12 * max(abs(t2 - t0), 1.0):
        raise ValidationError("snapshots must be equally spaced in time")
    return ComplexField(g, (trio[2].samples - trio[0].samples) / (t2 - t0))


def _residual_norm(grid: GridSpec, r: np.ndarray) -> float:
    return float(np.sqrt(integrate(RealField(grid, np.abs(r) ** 2))))


def _check_uniform_history(history: Sequence[WaveFunction]) -> None:
    if len(history) < 3:
        raise ValidationError("need at least three snapshots")
    grid = history[0].grid
    if any(w.grid != grid for w in history[1:]):
        raise ValidationError("snapshots live on different grids")
    times = np.array([w.time for w in history])
    dts = np.diff(times)
    if np.any(dts <= 0.0):
        raise ValidationError("snapshot times must be strictly increasing")
    if float(np.max(np.abs(dts - dts[0]))) > 1e-9 * float(dts[0]):
        raise ValidationError("snapshots must be uniformly spaced in time")


def nlse_residual(
    history: Sequence[WaveFunction], pot: PotentialSpec, params: PhysicalParams
) -> float:
    """Worst L2 norm of i hbar d_t psi - H psi over interior snapshots.

    d_t psi is a centered difference, so the value converges at O(dt^2) on
    true solutions.
    """
    _check_uniform_history(history)
    grid = history[0].grid
    _reject_unsupported(pot, grid)
    worst = 0.0
    for k in range(1, len(history) - 1):
        dt_psi = wavefunction_time_stencil(history[k - 1 : k + 2])
        mid = history[k]
        v_ext = pot.values_on(grid, mid.time).samples
        h_vals = _apply_hamiltonian(mid.field, v_ext, params, nonlinear_coupling(params))
        r = 1j * params.hbar * dt_psi.samples - h_vals
        worst = max(worst, _residual_norm(grid, r))
    return worst


def classical_wave_residual(
    history: Sequence[WaveFunction],
    pot: PotentialSpec,
    params: PhysicalParams,
    floor_rel: float = 1e-12,
) -> float:
    """Worst L2 residual of the classically mapped wave equation.

    The image of an exactly evolving classical pair obeys the linear
    equation with the curvature of the amplitude fed back in:

        i hbar d_t psi = -(hbar^2/2m) lap psi + V psi
                         + (hbar^2/2m) (lap sqrt(n) / sqrt(n)) psi

    Cells where n is below floor_rel times its peak are excluded: the
    feedback ratio is noise-dominated there and the density carries no mass.
    """
    _check_uniform_history(history)
    grid = history[0].grid
    _reject_unsupported(pot, grid)
    coeff = 0.5 * params.hbar**2 / params.mass
    worst = 0.0
    for k in range(1, len(history) - 1):
        dt_psi = wavefunction_time_stencil(history[k - 1 : k + 2])
        mid = history[k]
        amp = np.abs(mid.samples)
        n = amp**2
        safe = n >= floor_rel * float(n.max())
        lap_amp = spectral_laplacian(RealField(grid, amp)).samples
        feedback = np.zeros(grid.shape)
        feedback[safe] = lap_amp[safe] / amp[safe]
        v_ext = pot.values_on(grid, mid.time).samples
        lap = spectral_laplacian(mid.field).samples
        r = (
            1j * params.hbar * dt_psi.samples
            + coeff * lap
            - v_ext * mid.samples
            - coeff * feedback * mid.samples
        )
        r[~safe] = 0.0
        worst = max(worst, _residual_norm(grid, r))
    return worst
