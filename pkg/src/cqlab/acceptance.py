"""Numbered end-to-end checks gating a release.

Each criterion builds its own fixture, runs the relevant solvers, and
compares against an independent closed form (or a statistical bound where the
fixture is sampled).  Results carry the measured numbers next to the pinned
tolerances so a failure is diagnosable from the one-line summary.

Every runner accepts an ``hbar_scale`` knob used by the test harness: it
rescales the hbar handed to the simulation while reference values keep the
nominal hbar, so a deliberate 10% skew must fail exactly the criteria whose
verdicts depend on hbar and leave the rest untouched.
"""

from __future__ import annotations

import time as _time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bridge import (
    GaugeFunction,
    WaveFunction,
    averaged_lagrangian,
    averaged_lagrangian_psi,
    gauge_transform,
    madelung_forward,
    sigma_squared,
)
from .classical import (
    ActionField,
    QStochasticState,
    action_time_stencil,
    classical_trajectories,
    evolve_q_state,
    hj_time_derivative,
    lagrangian_density,
    liouville_evolve_ensemble,
    normalized_density,
    sample_ensemble_from_state,
)
from .core import (
    ComplexField,
    GridSpec,
    PhysicalParams,
    RealField,
    integrate,
    spectral_laplacian,
)
from .errors import ValidationError
from .observables import (
    Observable,
    ehrenfest_check,
    expect_classical,
    expect_quantum,
    heisenberg_product_classical,
    heisenberg_product_quantum,
    kinetic_momentum_classical,
    kinetic_momentum_quantum,
    variance_quantum,
)
from .potentials import PotentialSpec
from .quantum import split_step_propagate
from .wigner import compatibility_residual, wigner_transform, xi_expansion_check

__all__ = [
    "Criterion",
    "CriterionResult",
    "SUITES",
    "run_criterion",
    "run_suite",
    "format_result",
]

HBAR_REF = 1.0


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict[str, float]
    tolerance: str
    runtime_s: float


@dataclass(frozen=True)
class Criterion:
    number: int
    suite: str
    name: str
    runner: Callable[[float], tuple[bool, dict, str]]


# ---------------------------------------------------------------------------
# fixture helpers


def _gaussian_wave(
    grid: GridSpec, params: PhysicalParams, sigma, center=None, slope=None, chirp=None
) -> WaveFunction:
    d = grid.dims
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (d,))
    center = np.zeros(d) if center is None else np.broadcast_to(np.asarray(center, dtype=float), (d,))
    slope = np.zeros(d) if slope is None else np.broadcast_to(np.asarray(slope, dtype=float), (d,))
    chirp = np.zeros(d) if chirp is None else np.broadcast_to(np.asarray(chirp, dtype=float), (d,))
    coords = grid.meshes()
    logn = np.zeros(grid.shape)
    phase = np.zeros(grid.shape)
    for i in range(d):
        dx = coords[i] - center[i]
        logn -= dx**2 / (4.0 * sigma[i] ** 2)
        phase += slope[i] * coords[i] + 0.5 * chirp[i] * dx**2
    return WaveFunction.normalized(grid, np.exp(logn + 1j * phase / params.hbar), params)


def _gaussian_state(grid: GridSpec, sigma, center=0.0, slope=0.0, chirp=0.0) -> QStochasticState:
    x = grid.meshes()[0]
    n = normalized_density(grid, np.exp(-((x - center) ** 2) / (2.0 * sigma**2)))
    S = ActionField.from_parts(
        grid,
        quad=np.array([[chirp]]),
        lin=np.array([slope - chirp * center]),
        const=0.5 * chirp * center**2,
    )
    return QStochasticState(n, S, 0.0)


def _trig_samples(grid: GridSpec, rng, modes: int, amp: float) -> np.ndarray:
    coords = grid.meshes()
    out = np.zeros(grid.shape)
    for axis in range(grid.dims):
        L = grid.extents[axis]
        for j in range(1, modes + 1):
            c = rng.uniform(-amp, amp)
            ph = rng.uniform(0.0, 2.0 * np.pi)
            out = out + c * np.cos(2.0 * np.pi * j * coords[axis] / L + ph)
    if grid.dims == 2:
        c = rng.uniform(-amp, amp)
        ph0 = rng.uniform(0.0, 2.0 * np.pi)
        ph1 = rng.uniform(0.0, 2.0 * np.pi)
        out = out + c * np.cos(2.0 * np.pi * coords[0] / grid.extents[0] + ph0) * np.cos(
            2.0 * np.pi * coords[1] / grid.extents[1] + ph1
        )
    return out


def _random_smooth_state(grid: GridSpec, rng, hbar: float, windings) -> QStochasticState:
    """Nodeless periodic density with a winding trig action."""
    n = normalized_density(grid, np.exp(_trig_samples(grid, rng, modes=3, amp=0.5)))
    per = _trig_samples(grid, rng, modes=2, amp=0.4)
    lin = np.array(
        [2.0 * np.pi * hbar * w / grid.extents[k] for k, w in enumerate(np.atleast_1d(windings))]
    )
    S = ActionField.from_parts(grid, periodic=per, lin=lin)
    return QStochasticState(n, S, 0.0)


# ---------------------------------------------------------------------------
# criterion 1: norm conservation over many split steps


def _c1_norm_conservation(hbar_scale: float):
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale)
    grid = GridSpec.line(40.0, 512, -20.0)
    psi = _gaussian_wave(grid, params, sigma=1.0)
    pot = PotentialSpec.free(1)
    drift = [abs(float(integrate(psi.density())) - 1.0)]

    def watch(p: WaveFunction) -> None:
        drift.append(abs(float(integrate(p.density())) - 1.0))

    split_step_propagate(psi, pot, params, dt=1e-3, steps=10_000, callback=watch, stride=500)
    worst = max(drift)
    return worst < 1e-12, {"max_norm_drift": worst}, "max |norm - 1| < 1e-12"


# ---------------------------------------------------------------------------
# criterion 2: free-packet spreading law


def _c2_packet_spreading(hbar_scale: float):
    sigma0, m = 1.0, 1.0
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale, mass=m)
    grid = GridSpec.line(40.0, 512, -20.0)
    psi = _gaussian_wave(grid, params, sigma=sigma0)
    t_star = 2.0 * m * sigma0**2 / HBAR_REF
    steps = 400
    psi = split_step_propagate(psi, PotentialSpec.free(1), params, t_star / steps, steps)
    width2 = variance_quantum(psi, Observable.position(0), params)
    oracle = sigma0**2 * (1.0 + (HBAR_REF * t_star / (2.0 * m * sigma0**2)) ** 2)
    rel = abs(width2 - oracle) / oracle
    return rel < 1e-6, {"width2": width2, "rel_error": rel}, "relative width^2 error < 1e-6"


# ---------------------------------------------------------------------------
# criterion 3: Ehrenfest relations for a coherent packet


def _c3_ehrenfest(hbar_scale: float):
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale)
    omega, q0, p0 = 1.0, 1.0, 0.5
    grid = GridSpec.line(24.0, 256, -12.0)
    pot = PotentialSpec.harmonic(omega, 0.0, mass=params.mass)
    sigma = np.sqrt(params.hbar / (2.0 * params.mass * omega))
    psi = _gaussian_wave(grid, params, sigma=sigma, center=q0, slope=p0)

    steps = 25_134  # three periods; snapshots every other step
    dt = 6.0 * np.pi / (omega * steps)
    snaps: list[WaveFunction] = []
    split_step_propagate(psi, pot, params, dt, steps, snaps.append, stride=2)
    res = ehrenfest_check(snaps, pot, params)
    worst_q = float(np.max(np.abs(res["position"])))
    worst_p = float(np.max(np.abs(res["momentum"])))
    return (
        worst_q < 1e-6 and worst_p < 1e-6,
        {"max_position_residual": worst_q, "max_momentum_residual": worst_p},
        "both Ehrenfest residuals < 1e-6",
    )


# ---------------------------------------------------------------------------
# criterion 4: classical vs quantum expectations on random nodeless states


def _c4_expectation_identity(hbar_scale: float):
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale)
    rng = np.random.default_rng(20260814)
    windings = [-1, 0, 1, 2, 0]
    worst = 0.0

    grid1 = GridSpec.line(16.0, 256, -8.0)
    pot1 = PotentialSpec.harmonic(0.8, 0.3, mass=params.mass)
    probes = [
        Observable.position(0),
        Observable.momentum(0),
        Observable.momentum(0, 2),
        Observable.energy(),
    ]
    for k in range(5):
        st = _random_smooth_state(grid1, rng, params.hbar, windings[k])
        psi = madelung_forward(st, params)
        for obs in probes:
            c = expect_classical(st, obs, params, pot1)
            q = expect_quantum(psi, obs, params, pot1)
            worst = max(worst, abs(c - q))

    grid2 = GridSpec.square(12.0, 48, -6.0)
    for k in range(5):
        st = _random_smooth_state(grid2, rng, params.hbar, (windings[k], windings[4 - k]))
        psi = madelung_forward(st, params)
        c = expect_classical(st, Observable.angular_momentum_z(), params)
        q = expect_quantum(psi, Observable.angular_momentum_z(), params)
        worst = max(worst, abs(c - q))

    return worst < 1e-8, {"max_abs_difference": worst}, "max |<.>_C - <.>_Q| < 1e-8"


# ---------------------------------------------------------------------------
# criterion 5: Hamilton-Jacobi consistency on free analytic solutions


def _c5_hamilton_jacobi(hbar_scale: float):
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale)
    pot = PotentialSpec.free(1)

    # uniformly drifting periodic profile: S is linear in t, the stencil is exact
    grid_a = GridSpec.line(16.0, 256, -8.0)
    x = grid_a.axis(0)
    p0 = 0.8
    raw = np.exp(0.6 * np.cos(2.0 * np.pi * (x - 1.1) / 16.0))
    n0 = normalized_density(grid_a, raw)
    st_a = QStochasticState(n0, ActionField.from_parts(grid_a, lin=np.array([p0])), 0.0)
    snaps: list[QStochasticState] = []
    dt, steps = 1e-3, 800
    with warnings.catch_warnings():
        # the profile is deliberately delocalized; the boundary-mass advisory
        # targets localized packets and does not apply to a periodic fixture
        warnings.filterwarnings("ignore", message="initial density has boundary mass")
        final_a = evolve_q_state(st_a, pot, params, dt, steps, snaps.append, stride=1)
    mid = steps // 2
    stencil = action_time_stencil(snaps[mid - 1 : mid + 2])
    lag = lagrangian_density(snaps[mid], pot, params, dt_S=stencil)
    max_l = float(np.max(np.abs(lag.samples)))
    # the advected profile is the analytic density
    t_end = final_a.time
    shifted = np.exp(0.6 * np.cos(2.0 * np.pi * (x - 1.1 - p0 * t_end) / 16.0))
    n_exact = shifted / float(integrate(RealField(grid_a, raw)))
    field_err = float(np.max(np.abs(final_a.n.samples - n_exact)))

    # focusing chirp: closed-form quadratic action, finite caustic time
    grid_b = GridSpec.line(24.0, 256, -12.0)
    c, l0, c0, sigma = -0.4, 0.3, 0.2, 1.2
    st_b = _gaussian_state(grid_b, sigma=sigma, center=0.0, slope=l0, chirp=c)
    S_b = ActionField.from_parts(
        grid_b, quad=np.array([[c]]), lin=np.array([l0]), const=c0
    )
    st_b = QStochasticState(st_b.n, S_b, 0.0)
    t_caustic = -1.0 / c
    steps_b = 1250
    t_b = 0.5 * t_caustic
    dt_b = t_b / steps_b

    starts = [-2.0, -0.8, 0.5, 1.4, 2.2]
    bundle = classical_trajectories(st_b, pot, params, starts, dt_b, steps_b)
    times = bundle.times
    traj_err = 0.0
    for j, x0 in enumerate(starts):
        exact_pos = x0 * (1.0 + c * times) + l0 * times
        exact_mom = np.full_like(times, c * x0 + l0)
        traj_err = max(traj_err, float(np.max(np.abs(bundle.positions[:, j, 0] - exact_pos))))
        traj_err = max(traj_err, float(np.max(np.abs(bundle.momenta[:, j, 0] - exact_mom))))

    final_b = evolve_q_state(st_b, pot, params, dt_b, steps_b)
    jac = 1.0 + c * t_b
    quad_exact = c / jac
    lin_exact = l0 / jac
    const_exact = c0 - l0**2 * t_b / (2.0 * jac)
    coeff_err = max(
        abs(final_b.S.quad[0, 0] - quad_exact),
        abs(final_b.S.lin[0] - lin_exact),
        abs(final_b.S.const - const_exact),
    )
    xb = grid_b.axis(0)
    z0 = float(integrate(RealField(grid_b, np.exp(-(xb**2) / (2.0 * sigma**2)))))
    n_b_exact = np.exp(-(((xb - l0 * t_b) / jac) ** 2) / (2.0 * sigma**2)) / (z0 * jac)
    field_err = max(field_err, float(np.max(np.abs(final_b.n.samples - n_b_exact))))

    dts_exact = (
        -0.5 * (c / jac) ** 2 * xb**2 - (c * l0 / jac**2) * xb - 0.5 * l0**2 / jac**2
    )
    lag_b = lagrangian_density(final_b, pot, params, dt_S=RealField(grid_b, dts_exact))
    max_l = max(max_l, float(np.max(np.abs(lag_b.samples))))

    passed = max_l < 1e-8 and traj_err < 1e-6 and field_err < 1e-6 and coeff_err < 1e-6
    return (
        passed,
        {
            "max_lagrangian": max_l,
            "trajectory_error": traj_err,
            "field_error": field_err,
            "coefficient_error": coeff_err,
        },
        "max |L| < 1e-8; trajectory/field errors < 1e-6",
    )


# ---------------------------------------------------------------------------
# criterion 6: field evolution vs sampled particle ensemble


def _c6_field_vs_ensemble(hbar_scale: float):
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale)
    grid = GridSpec.line(16.0, 256, -8.0)
    pot = PotentialSpec.harmonic(1.0, 0.0, mass=params.mass)
    st = _gaussian_state(grid, sigma=1.0, center=0.8, slope=0.4)
    ens = sample_ensemble_from_state(st, 100_000, seed=20260814)

    dt, seg = 5e-4, 400
    max_z = 0.0
    for _ in range(5):
        st = evolve_q_state(st, pot, params, dt, seg)
        ens = liouville_evolve_ensemble(ens, pot, params, dt, seg, box=grid)
        mean_q = expect_classical(st, Observable.position(0), params)
        mean_p = expect_classical(st, Observable.momentum(0), params)
        for field_mean, samples in ((mean_q, ens.q[:, 0]), (mean_p, ens.p[:, 0])):
            se = float(np.std(samples)) / np.sqrt(ens.count)
            z = abs(float(samples.mean()) - field_mean) / se
            max_z = max(max_z, z)
    return max_z <= 3.0, {"max_z_score": max_z}, "all mean deviations <= 3 standard errors"


# ---------------------------------------------------------------------------
# criterion 7: variational coefficient of the internal-noise term


def _c7_variational_coefficient(hbar_scale: float):
    beta, m = 1.0, 1.0
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale, mass=m, beta=beta)
    grid = GridSpec.line(20.0, 128, -10.0)
    psi = _gaussian_wave(grid, params, sigma=1.1, center=0.4, slope=0.6, chirp=0.3)
    vals = psi.samples
    cell = grid.cell_volume
    pref = beta**2 * params.hbar**2 / (8.0 * m)

    def functional(arr: np.ndarray) -> float:
        return pref * float(np.sum(np.cbrt(np.abs(arr) ** 10)) * cell)

    coeff_ref = 5.0 * beta**2 * HBAR_REF**2 / (24.0 * m)
    n = np.abs(vals) ** 2
    gradient_ref = coeff_ref * np.cbrt(n**2) * vals

    eps = 1e-5
    rng = np.random.default_rng(7)
    eta = _trig_samples(grid, rng, 3, 0.5) + 1j * _trig_samples(grid, rng, 3, 0.5)
    fd = (functional(vals + eps * eta) - functional(vals - eps * eta)) / (2.0 * eps)
    analytic = 2.0 * float(np.real(np.sum(np.conj(eta) * gradient_ref)) * cell)
    rel_dir = abs(fd - analytic) / abs(analytic)

    rel_point = 0.0
    peak = float(n.max())
    for j in range(0, grid.points[0], 8):
        if n[j] < 1e-2 * peak:
            continue
        probe = np.zeros(grid.shape, dtype=np.complex128)
        probe[j] = 1.0
        d_re = (functional(vals + eps * probe) - functional(vals - eps * probe)) / (2.0 * eps)
        d_im = (functional(vals + 1j * eps * probe) - functional(vals - 1j * eps * probe)) / (
            2.0 * eps
        )
        fd_grad = (d_re + 1j * d_im) / (2.0 * cell)
        rel_point = max(rel_point, abs(fd_grad - gradient_ref[j]) / abs(gradient_ref[j]))

    worst = max(rel_dir, rel_point)
    return (
        worst < 1e-6,
        {"directional_rel_error": rel_dir, "pointwise_rel_error": rel_point},
        "relative gradient error < 1e-6",
    )


# ---------------------------------------------------------------------------
# criterion 8: gauge invariance of the Lagrangian and kinetic momentum


def _c8_gauge_invariance(hbar_scale: float):
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale, mass=1.0, charge=1.4)
    grid = GridSpec.line(18.0, 192, -9.0)
    x = grid.axis(0)
    pot = PotentialSpec.harmonic(0.9, -0.2, mass=params.mass)

    # analytic periodic density (no boundary seam) keeps spectral derivatives
    # exact; the slope is winding-quantized so the polar form is single-valued
    n = normalized_density(grid, np.exp(0.8 * np.cos(2.0 * np.pi * (x - 0.4) / 18.0)))
    slope = 2.0 * np.pi * params.hbar * 2.0 / 18.0
    per = 0.5 * np.cos(2.0 * np.pi * (x - 0.7) / 18.0)
    S = ActionField.from_parts(grid, periodic=per, lin=np.array([slope]))
    st = QStochasticState(n, S, 0.0)
    psi = madelung_forward(st, params)

    h = params.hbar
    v_ext = pot.values_on(grid, 0.0).samples
    h_psi = (
        -(h**2) / (2.0 * params.mass) * spectral_laplacian(psi.field).samples
        + v_ext * psi.samples
    )
    dt_psi = ComplexField(grid, h_psi / (1j * h))
    dt_s = hj_time_derivative(st, pot, params)

    gauges = (
        GaugeFunction(RealField(grid, 0.3 * np.sin(2.0 * np.pi * x / 18.0)), (1.0,)),
        GaugeFunction(1.0, (0.0, 2.2)),
    )
    worst_lag = 0.0
    worst_kin = 0.0
    base_q = averaged_lagrangian_psi(psi, pot, params, dt_psi)
    base_c = averaged_lagrangian(st, pot, params, dt_s)
    kin_q = kinetic_momentum_quantum(psi, params, pot)
    kin_c = kinetic_momentum_classical(st, params, pot)

    for gauge in gauges:
        lam = gauge.values(grid, 0.0)
        lam_dot = gauge.time_derivative(grid, 0.0)

        psi2, pot_q2 = gauge_transform(psi, pot, params, gauge)
        dt_psi2 = ComplexField(
            grid,
            (dt_psi.samples + 1j * params.charge * lam_dot / h * psi.samples)
            * np.exp(1j * params.charge * lam / h),
        )
        lag_q2 = averaged_lagrangian_psi(psi2, pot_q2, params, dt_psi2)
        worst_lag = max(worst_lag, float(np.max(np.abs(lag_q2.samples - base_q.samples))))
        kin_q2 = kinetic_momentum_quantum(psi2, params, pot_q2)
        worst_kin = max(worst_kin, float(np.max(np.abs(kin_q2 - kin_q))))

        st2, pot_c2 = gauge_transform(st, pot, params, gauge)
        dt_s2 = RealField(grid, dt_s.samples + params.charge * lam_dot)
        lag_c2 = averaged_lagrangian(st2, pot_c2, params, dt_s2)
        worst_lag = max(worst_lag, float(np.max(np.abs(lag_c2.samples - base_c.samples))))
        kin_c2 = kinetic_momentum_classical(st2, params, pot_c2)
        worst_kin = max(worst_kin, float(np.max(np.abs(kin_c2 - kin_c))))

    passed = worst_lag < 1e-10 and worst_kin < 1e-10
    return (
        passed,
        {"max_lagrangian_change": worst_lag, "max_kinetic_momentum_change": worst_kin},
        "pointwise and expectation changes < 1e-10",
    )


# ---------------------------------------------------------------------------
# criterion 9: Wigner transform marginals and negativity


def _c9_wigner_marginals(hbar_scale: float):
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale)
    grid = GridSpec.line(20.0, 256, -10.0)
    x = grid.axis(0)
    omega = 1.0
    g0 = np.exp(-params.mass * omega * x**2 / (2.0 * params.hbar))
    psi0 = WaveFunction.normalized(grid, g0, params)
    psi1 = WaveFunction.normalized(grid, x * g0, params)

    worst_marginal = 0.0
    for psi in (psi0, psi1):
        w = wigner_transform(psi)
        pos = w.position_marginal().samples - psi.density().samples
        mom = w.momentum_marginal().samples - psi.momentum_density().samples
        worst_marginal = max(
            worst_marginal, float(np.max(np.abs(pos))), float(np.max(np.abs(mom)))
        )

    w0 = wigner_transform(psi0)
    min_w0 = float(w0.samples.min())
    w1 = wigner_transform(psi1)
    iq = int(np.argmin(np.abs(w1.position_grid.axis(0))))
    ip = int(np.argmin(np.abs(w1.momentum_grid.axis(0))))
    origin_w1 = float(w1.samples[iq, ip])

    passed = worst_marginal < 1e-8 and min_w0 >= -1e-12 and origin_w1 < 0.0
    return (
        passed,
        {
            "max_marginal_error": worst_marginal,
            "min_w_ground": min_w0,
            "w_excited_origin": origin_w1,
        },
        "marginals < 1e-8; ground W >= -1e-12; excited W(0,0) < 0",
    )


# ---------------------------------------------------------------------------
# criterion 10: chord-model ledger on a spread Gaussian


def _c10_chord_ledger(hbar_scale: float):
    import sympy

    params = PhysicalParams(hbar=HBAR_REF * hbar_scale)
    sigma = 2.0
    grid = GridSpec.line(40.0, 256, -20.0)
    psi = _gaussian_wave(grid, params, sigma=sigma)
    spacing = grid.spacings[0]

    xi_list = [k * spacing / params.hbar for k in (-16, -4, -1, 2, 8, 16)]
    res_local = float(np.max(compatibility_residual(psi, xi_list, model="local")))
    res_det = float(
        compatibility_residual(psi, [4 * spacing / params.hbar], model="deterministic")[0]
    )

    rep = xi_expansion_check(psi)
    xs, ss, hs = sympy.symbols("x sigma hbar", positive=True)
    n_sym = sympy.exp(-(xs**2) / (2 * ss**2))
    variance_oracle = sympy.lambdify(
        (xs, ss, hs), -sympy.Rational(1, 4) * hs**2 * sympy.diff(sympy.log(n_sym), xs, 2)
    )
    discrepancy_oracle = sympy.lambdify(
        (xs, ss, hs), sympy.simplify(-sympy.Rational(1, 4) * hs**2 * sympy.diff(n_sym, xs, 2) / n_sym)
    )

    x = grid.axis(0)
    n = psi.density().samples
    compare = n >= 1e-6 * float(n.max())
    var_ref = np.broadcast_to(variance_oracle(x, sigma, HBAR_REF), grid.shape)
    disc_ref = discrepancy_oracle(x, sigma, HBAR_REF)
    err_variance = float(np.max(np.abs(rep.local_tensor[0, 0][compare] - var_ref[compare])))
    err_discrepancy = float(np.max(np.abs(rep.discrepancy[0, 0][compare] - disc_ref[compare])))
    integrated = float(np.max(np.abs(rep.integrated_discrepancy)))

    passed = (
        res_local < 1e-10
        and err_variance < 1e-8
        and err_discrepancy < 1e-8
        and integrated < 1e-10
        and res_det > 1e-3
    )
    return (
        passed,
        {
            "max_local_residual": res_local,
            "variance_field_error": err_variance,
            "discrepancy_field_error": err_discrepancy,
            "integrated_discrepancy": integrated,
            "deterministic_residual": res_det,
        },
        "local < 1e-10; fields < 1e-8; integral < 1e-10; deterministic > 1e-3",
    )


# ---------------------------------------------------------------------------
# criterion 11: uncertainty floor and Gaussian saturation


def _c11_heisenberg(hbar_scale: float):
    params = PhysicalParams(hbar=HBAR_REF * hbar_scale)
    floor = 0.5 * HBAR_REF * (1.0 - 1e-6)
    rng = np.random.default_rng(11)

    grid = GridSpec.line(24.0, 256, -12.0)
    x = grid.axis(0)
    products = []
    gaussian_products = []

    psi_g = _gaussian_wave(grid, params, sigma=0.9)
    gaussian_products.append(heisenberg_product_quantum(psi_g, params))
    psi_chirp = _gaussian_wave(grid, params, sigma=1.0, slope=0.4, chirp=0.5)
    products.append(heisenberg_product_quantum(psi_chirp, params))
    g0 = np.exp(-(x**2) / (2.0 * params.hbar))
    psi_ho1 = WaveFunction.normalized(grid, x * g0, params)
    products.append(heisenberg_product_quantum(psi_ho1, params))

    st_g = _gaussian_state(grid, sigma=1.2)
    gaussian_products.append(heisenberg_product_classical(st_g, params))
    st_trig = _random_smooth_state(grid, rng, params.hbar, 1)
    products.append(heisenberg_product_classical(st_trig, params))

    grid2 = GridSpec.square(18.0, 64, -9.0)
    psi_2d = _gaussian_wave(grid2, params, sigma=(0.8, 1.3))
    for axis in range(2):
        gaussian_products.append(heisenberg_product_quantum(psi_2d, params, axis=axis))

    products.extend(gaussian_products)
    min_product = min(products)
    equality_dev = max(abs(p - 0.5 * HBAR_REF) for p in gaussian_products)
    passed = min_product >= floor and equality_dev < 1e-8
    return (
        passed,
        {"min_product": min_product, "gaussian_deviation": equality_dev},
        "products >= hbar/2 (1 - 1e-6); Gaussian within 1e-8 of hbar/2",
    )


# ---------------------------------------------------------------------------
# criterion 12: hbar scaling of the internal-noise scalar and classical limit


def _c12_hbar_scaling(hbar_scale: float):
    sigma = 1.5
    grid = GridSpec.line(30.0, 256, -15.0)
    st = _gaussian_state(grid, sigma=sigma)
    pot = PotentialSpec.free(1)

    hbars = [HBAR_REF * hbar_scale * f for f in (1.0, 0.5, 0.25, 0.125)]
    noise = []
    gaps = []
    for h in hbars:
        p = PhysicalParams(hbar=h)
        sig = sigma_squared(st.n, p)
        noise.append(float(integrate(RealField(grid, st.n.samples * sig.samples))))
        psi = madelung_forward(st, p)
        psi = split_step_propagate(psi, pot, p, dt=0.01, steps=100)
        diff = psi.density().samples - st.n.samples
        gaps.append(float(np.sqrt(integrate(RealField(grid, diff**2)))))

    slope = float(np.polyfit(np.log(hbars), np.log(noise), 1)[0])
    monotone = all(gaps[i + 1] < gaps[i] for i in range(len(gaps) - 1))
    passed = abs(slope - 2.0) <= 0.01 and monotone
    return (
        passed,
        {"noise_slope": slope, "gap_largest_hbar": gaps[0], "gap_smallest_hbar": gaps[-1]},
        "slope 2.00 +- 0.01; density gap decreases as hbar halves",
    )


# ---------------------------------------------------------------------------
# registry


_CRITERIA = (
    Criterion(1, "quantum", "norm-conservation", _c1_norm_conservation),
    Criterion(2, "quantum", "free-packet-spreading", _c2_packet_spreading),
    Criterion(3, "quantum", "ehrenfest-harmonic", _c3_ehrenfest),
    Criterion(4, "identity", "expectation-identity", _c4_expectation_identity),
    Criterion(5, "classical", "hamilton-jacobi-consistency", _c5_hamilton_jacobi),
    Criterion(6, "classical", "field-vs-ensemble", _c6_field_vs_ensemble),
    Criterion(7, "bridge", "variational-coefficient", _c7_variational_coefficient),
    Criterion(8, "bridge", "gauge-invariance", _c8_gauge_invariance),
    Criterion(9, "wigner", "wigner-marginals", _c9_wigner_marginals),
    Criterion(10, "wigner", "chord-expansion-ledger", _c10_chord_ledger),
    Criterion(11, "identity", "heisenberg-floor", _c11_heisenberg),
    Criterion(12, "bridge", "hbar-scaling", _c12_hbar_scaling),
)

SUITES: dict[str, tuple[int, ...]] = {
    "classical": (5, 6),
    "bridge": (7, 8, 12),
    "quantum": (1, 2, 3),
    "identity": (4, 11),
    "wigner": (9, 10),
    "all": tuple(c.number for c in _CRITERIA),
}


def run_criterion(number: int, hbar_scale: float = 1.0) -> CriterionResult:
    by_number = {c.number: c for c in _CRITERIA}
    if number not in by_number:
        raise ValidationError(f"no criterion {number}")
    crit = by_number[number]
    started = _time.perf_counter()
    passed, measured, tolerance = crit.runner(hbar_scale)
    elapsed = _time.perf_counter() - started
    return CriterionResult(crit.number, crit.name, bool(passed), measured, tolerance, elapsed)


def run_suite(
    suite: str = "all", hbar_scales: dict[int, float] | None = None
) -> list[CriterionResult]:
    """Run a named suite; hbar_scales={n: s} skews hbar inside criterion n only."""
    if suite not in SUITES:
        raise ValidationError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    scales = hbar_scales or {}
    return [run_criterion(n, scales.get(n, 1.0)) for n in SUITES[suite]]


def format_result(res: CriterionResult) -> str:
    verdict = "PASS" if res.passed else "FAIL"
    details = ", ".join(f"{k}={v:.3g}" for k, v in res.measured.items())
    return (
        f"[{res.number:2d}] {verdict} {res.name:<28s} {details} "
        f"(need: {res.tolerance}) [{res.runtime_s:.2f}s]"
    )
