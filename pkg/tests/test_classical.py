"""Transport of exact classical states: fields, particles, characteristics."""

import numpy as np
import pytest

from cqlab import (
    ActionField,
    CausticError,
    GridSpec,
    ParticleEnsemble,
    PhysicalParams,
    PotentialSpec,
    PStochasticState,
    QStochasticState,
    RealField,
    ValidationError,
    action_time_stencil,
    classical_trajectories,
    evolve_p_state,
    evolve_q_state,
    hj_time_derivative,
    integrate,
    lagrangian_density,
    liouville_evolve_ensemble,
    normalized_density,
    sample_ensemble_from_state,
)
from cqlab.errors import UnsupportedPotentialError

from conftest import gaussian_state, trig_density_state


# ---------------------------------------------------------------------------
# action representation


def test_action_field_polynomial_gradient(grid1d):
    S = ActionField.from_parts(grid1d, quad=np.array([[0.4]]), lin=np.array([-0.3]), const=1.0)
    x = grid1d.axis(0)
    grads = S.gradient_values()
    assert np.max(np.abs(grads[0] - (0.4 * x - 0.3))) < 1e-12
    pts = np.array([-2.2, 0.5, 3.7])
    assert np.max(np.abs(S.gradient_at(pts) - (0.4 * pts - 0.3))) < 1e-12


def test_action_field_periodic_gradient(grid1d):
    x = grid1d.axis(0)
    k = 2.0 * np.pi * 2.0 / 16.0
    S = ActionField.from_parts(grid1d, periodic=0.5 * np.sin(k * x))
    assert np.max(np.abs(S.gradient_values()[0] - 0.5 * k * np.cos(k * x))) < 1e-11


def test_action_field_requires_symmetric_quad(grid2d):
    with pytest.raises(ValidationError):
        ActionField.from_parts(grid2d, quad=np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_normalized_density_integrates_to_one(grid1d):
    x = grid1d.axis(0)
    n = normalized_density(grid1d, np.exp(-(x**2)) + 0.001)
    assert integrate(n) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValidationError):
        normalized_density(grid1d, np.zeros_like(x))


def test_state_validation_rejects_bad_density(grid1d):
    x = grid1d.axis(0)
    good = np.exp(-(x**2))
    with pytest.raises(ValidationError):
        QStochasticState(RealField(grid1d, good / integrate(RealField(grid1d, good)) * 2.0),
                         ActionField.zero(grid1d))
    bad = good.copy()
    bad[3] = -1.0
    with pytest.raises(ValidationError):
        QStochasticState(RealField(grid1d, bad), ActionField.zero(grid1d))


# ---------------------------------------------------------------------------
# field evolution oracles


def test_free_drift_advects_density(grid1d, params):
    p0 = 0.8
    st = trig_density_state(grid1d, winding=2)
    st = QStochasticState(st.n, ActionField.from_parts(grid1d, lin=np.array([p0])), 0.0)
    with pytest.warns(UserWarning, match="boundary mass"):
        out = evolve_q_state(st, PotentialSpec.free(1), params, dt=1e-3, steps=200)
    x = grid1d.axis(0)
    L = grid1d.extents[0]
    raw = np.exp(0.6 * np.cos(2.0 * np.pi * (x - 1.1 - p0 * out.time) / L))
    expected = raw / integrate(RealField(grid1d, np.exp(0.6 * np.cos(2.0 * np.pi * (x - 1.1) / L))))
    assert np.max(np.abs(out.n.samples - expected)) < 1e-10
    # polynomial action parts stay exactly polynomial under a free drift
    assert np.max(np.abs(out.S.periodic.samples)) < 1e-12
    assert out.S.lin[0] == pytest.approx(p0, abs=1e-14)


def test_uniform_field_shifts_momentum(grid1d, params):
    s = 0.5
    st = gaussian_state(grid1d, sigma=1.0, center=-1.0, slope=0.3)
    out = evolve_q_state(st, PotentialSpec.uniform_field([s]), params, dt=1e-3, steps=400)
    t = out.time
    # dS/dq is spatially uniform and obeys dp/dt = -s; the packet center rides it
    assert out.S.lin[0] == pytest.approx(0.3 - s * t, abs=1e-10)
    mean = integrate(RealField(grid1d, grid1d.axis(0) * out.n.samples))
    assert mean == pytest.approx(-1.0 + 0.3 * t - 0.5 * s * t**2, abs=1e-8)


def test_harmonic_chirp_matches_riccati_solution(grid1d, params):
    omega = 1.0
    st = gaussian_state(grid1d, sigma=1.0)
    out = evolve_q_state(st, PotentialSpec.harmonic(omega, 0.0), params, dt=5e-4, steps=800)
    t = out.time
    assert out.S.quad[0, 0] == pytest.approx(-params.mass * omega * np.tan(omega * t), abs=1e-9)
    # width contracts along the focusing branch
    var = integrate(RealField(grid1d, grid1d.axis(0) ** 2 * out.n.samples))
    assert var == pytest.approx(np.cos(omega * t) ** 2, abs=1e-6)


def test_focusing_caustic_aborts(params):
    grid = GridSpec.line(20.0, 256, -10.0)
    st = gaussian_state(grid, sigma=1.0)
    with pytest.raises(CausticError):
        evolve_q_state(st, PotentialSpec.harmonic(1.0, 0.0), params, dt=5e-4, steps=3400)


def test_momentum_family_uniform_field(params):
    grid = GridSpec.line(20.0, 128, -10.0)
    pgrid = grid.momentum_grid(params.hbar)
    p = pgrid.axis(0)
    n = normalized_density(pgrid, np.exp(-(p**2) / 2.0))
    st = PStochasticState(n, ActionField.from_parts(pgrid, lin=np.array([0.4])), 0.0)
    s = 0.5
    out = evolve_p_state(st, PotentialSpec.uniform_field([s]), params, dt=1e-3, steps=300)
    t = out.time
    mean_p = integrate(RealField(pgrid, p * out.n.samples))
    assert mean_p == pytest.approx(-s * t, abs=1e-9)


def test_momentum_family_rejects_nonpolynomial_potential(params):
    grid = GridSpec.line(20.0, 128, -10.0)
    pgrid = grid.momentum_grid(params.hbar)
    p = pgrid.axis(0)
    n = normalized_density(pgrid, np.exp(-(p**2)))
    st = PStochasticState(n, ActionField.zero(pgrid), 0.0)
    x = grid.axis(0)
    table = PotentialSpec.from_table(RealField(grid, np.cos(2.0 * np.pi * x / 20.0)))
    with pytest.raises(UnsupportedPotentialError):
        evolve_p_state(st, table, params, dt=1e-3, steps=1)


# ---------------------------------------------------------------------------
# ensembles


def test_liouville_matches_harmonic_rotation(params):
    q0 = np.array([1.0, -0.5, 0.2])
    p0 = np.array([0.0, 0.3, -0.7])
    w = np.full(3, 1.0 / 3.0)
    ens = ParticleEnsemble(q0, p0, w)
    out = liouville_evolve_ensemble(ens, PotentialSpec.harmonic(1.0, 0.0), params, 1e-3, 1000)
    t = out.time
    exact_q = q0 * np.cos(t) + p0 * np.sin(t)
    exact_p = p0 * np.cos(t) - q0 * np.sin(t)
    assert np.max(np.abs(out.q[:, 0] - exact_q)) < 1e-6
    assert np.max(np.abs(out.p[:, 0] - exact_p)) < 1e-6
    assert np.all(out.w == w)


def test_ensemble_escape_warns(params):
    grid = GridSpec.line(8.0, 64, -4.0)
    ens = ParticleEnsemble(np.array([3.5]), np.array([2.0]), np.array([1.0]))
    with pytest.warns(UserWarning, match="box"):
        liouville_evolve_ensemble(ens, PotentialSpec.free(1), params, 0.1, 10, box=grid)


def test_sampler_is_deterministic_and_unbiased(grid1d, params):
    st = gaussian_state(grid1d, sigma=1.2, center=0.5, slope=0.4)
    a = sample_ensemble_from_state(st, 40_000, seed=123)
    b = sample_ensemble_from_state(st, 40_000, seed=123)
    assert np.array_equal(a.q, b.q) and np.array_equal(a.p, b.p)
    # momentum is the sheet value at the sampled position: exact for linear S
    assert np.max(np.abs(a.p - 0.4)) < 1e-12
    se = 1.2 / np.sqrt(a.count)
    assert abs(float(a.q.mean()) - 0.5) < 4.0 * se
    assert np.all(a.w == 1.0 / a.count)


def test_weights_must_normalize():
    with pytest.raises(ValidationError):
        ParticleEnsemble(np.array([0.0, 1.0]), np.array([0.0, 0.0]), np.array([0.5, 0.6]))


# ---------------------------------------------------------------------------
# characteristics and consistency diagnostics


def test_trajectories_follow_harmonic_flow(params):
    grid = GridSpec.line(20.0, 256, -10.0)
    st = gaussian_state(grid, sigma=1.5, slope=0.3)
    starts = [-1.0, 0.4, 1.7]
    bundle = classical_trajectories(st, PotentialSpec.harmonic(1.0, 0.0), params, starts, 1e-3, 900)
    t = bundle.times
    for j, x0 in enumerate(starts):
        exact = x0 * np.cos(t) + 0.3 * np.sin(t)
        assert np.max(np.abs(bundle.positions[:, j, 0] - exact)) < 1e-6


def test_trajectory_starts_must_be_inside(params):
    grid = GridSpec.line(8.0, 64, -4.0)
    st = gaussian_state(grid, sigma=0.8)
    with pytest.raises(ValidationError):
        classical_trajectories(st, PotentialSpec.free(1), params, [9.0], 1e-3, 10)


def test_lagrangian_vanishes_on_exact_solution(grid1d, params):
    # for a state satisfying the transport pair, n (dS/dt + H) == 0 pointwise
    pot = PotentialSpec.uniform_field([0.5])
    st = gaussian_state(grid1d, sigma=1.0, center=-1.0, slope=0.3)
    dts = hj_time_derivative(st, pot, params)
    lag = lagrangian_density(st, pot, params, dt_S=dts)
    assert np.max(np.abs(lag.samples)) < 1e-12


def test_action_stencil_needs_uniform_spacing(grid1d, params):
    pot = PotentialSpec.free(1)
    st = gaussian_state(grid1d, sigma=1.0, slope=0.2)
    s1 = evolve_q_state(st, pot, params, 1e-3, 100)
    s2 = evolve_q_state(s1, pot, params, 1e-3, 100)
    trio = [st, s1, s2]
    stencil = action_time_stencil(trio)
    lag = lagrangian_density(s1, pot, params, dt_S=stencil)
    assert np.max(np.abs(lag.samples)) < 1e-7
    s2_bad = evolve_q_state(s1, pot, params, 1e-3, 50)
    with pytest.raises(ValidationError):
        action_time_stencil([st, s1, s2_bad])
