"""Expectation values, spreads, mixtures, marginals, and conditioning."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqlab import (
    ActionField,
    CoverageError,
    DensityMatrix,
    GridSpec,
    Observable,
    PhysicalParams,
    PotentialSpec,
    QStochasticState,
    ValidationError,
    WaveFunction,
    ZeroCaptureError,
    collapse_classical,
    collapse_quantum,
    ehrenfest_check,
    expect_classical,
    expect_ensemble,
    expect_quantum,
    heisenberg_product_classical,
    heisenberg_product_quantum,
    integrate,
    kinetic_momentum_quantum,
    madelung_forward,
    marginals_classical,
    marginals_ensemble,
    marginals_quantum,
    mixture_expectation,
    normalized_density,
    sample_ensemble_from_state,
    split_step_propagate,
    variance_classical,
    variance_quantum,
)
from cqlab.errors import UnsupportedObservableError, UnsupportedPotentialError

from conftest import gaussian_state, trig_density_state


# ---------------------------------------------------------------------------
# naming


def test_observable_name_parse_round_trip():
    cases = ["q0", "p1", "q0^2", "p0^3", "kinetic", "potential", "energy", "lz", "lz^2"]
    for name in cases:
        assert Observable.parse(name).name == name
    with pytest.raises(ValidationError):
        Observable.parse("px")


# ---------------------------------------------------------------------------
# classical moments on Gaussian fixtures


def test_classical_gaussian_moments(grid1d, params):
    st = gaussian_state(grid1d, sigma=1.0, center=0.5, slope=0.3)
    assert expect_classical(st, Observable.position(0), params) == pytest.approx(0.5, abs=1e-9)
    assert expect_classical(st, Observable.position(0, 2), params) == pytest.approx(
        1.0 + 0.25, abs=1e-8
    )
    assert expect_classical(st, Observable.momentum(0), params) == pytest.approx(0.3, abs=1e-10)
    bare = expect_classical(st, Observable.momentum(0, 2), params, use_sigma=False)
    assert bare == pytest.approx(0.09, abs=1e-10)
    stochastic = expect_classical(st, Observable.momentum(0, 2), params, use_sigma=True)
    assert stochastic == pytest.approx(0.09 + (params.hbar / 2.0) ** 2, abs=1e-8)


def test_classical_quantum_expectations_agree(grid1d, params):
    pot = PotentialSpec.harmonic(0.8, 0.3)
    st = trig_density_state(grid1d, winding=1, hbar=params.hbar)
    psi = madelung_forward(st, params)
    for obs in (
        Observable.position(0),
        Observable.momentum(0),
        Observable.momentum(0, 2),
        Observable.kinetic(),
        Observable.energy(),
    ):
        c = expect_classical(st, obs, params, pot)
        q = expect_quantum(psi, obs, params, pot)
        assert c == pytest.approx(q, abs=1e-10)


def test_angular_momentum_oracle_2d(grid2d, params):
    # Gaussian at (c0, c1) with uniform momentum (a, b): <lz> = c0 b - c1 a
    xx, yy = grid2d.meshes()
    n = normalized_density(grid2d, np.exp(-((xx - 0.5) ** 2 + (yy + 0.3) ** 2)))
    a, b = 2.0 * np.pi / 12.0, -4.0 * np.pi / 12.0  # box-commensurate
    S = ActionField.from_parts(grid2d, lin=np.array([a, b]))
    st = QStochasticState(n, S, 0.0)
    expected = 0.5 * b - (-0.3) * a
    assert expect_classical(st, Observable.angular_momentum_z(), params) == pytest.approx(
        expected, abs=1e-9
    )
    psi = madelung_forward(st, params)
    assert expect_quantum(psi, Observable.angular_momentum_z(), params) == pytest.approx(
        expected, abs=1e-9
    )


def test_angular_momentum_needs_two_axes(grid1d, params):
    st = gaussian_state(grid1d)
    with pytest.raises(UnsupportedObservableError):
        expect_classical(st, Observable.angular_momentum_z(), params)


# ---------------------------------------------------------------------------
# spreads and the uncertainty floor


def test_gaussian_saturates_uncertainty_product(grid1d, params):
    st = gaussian_state(grid1d, sigma=0.9)
    assert heisenberg_product_classical(st, params) == pytest.approx(
        0.5 * params.hbar, abs=1e-9
    )
    psi = madelung_forward(st, params)
    assert heisenberg_product_quantum(psi, params) == pytest.approx(0.5 * params.hbar, abs=1e-9)


def test_variance_matches_between_sides(grid1d, params):
    st = gaussian_state(grid1d, sigma=1.1, slope=0.2, chirp=0.3)
    psi = madelung_forward(st, params)
    for obs in (Observable.position(0), Observable.momentum(0)):
        assert variance_classical(st, obs, params) == pytest.approx(
            variance_quantum(psi, obs, params), abs=1e-9
        )


@given(sigma=st.floats(0.5, 1.6), chirp=st.floats(-0.5, 0.5))
@settings(max_examples=15)
def test_uncertainty_floor_holds(sigma, chirp):
    grid = GridSpec.line(20.0, 160, -10.0)
    params = PhysicalParams(hbar=0.8)
    st = gaussian_state(grid, sigma=sigma, chirp=chirp)
    assert heisenberg_product_classical(st, params) >= 0.5 * params.hbar * (1.0 - 1e-9)


# ---------------------------------------------------------------------------
# kinetic momentum and Ehrenfest bookkeeping


def test_kinetic_momentum_subtracts_vector_potential(params):
    grid = GridSpec.line(16.0, 128, -8.0)
    x = grid.axis(0)
    k0 = 2.0 * np.pi * 3.0 / 16.0
    psi = WaveFunction.normalized(grid, np.exp(1j * k0 * x), params)
    a0 = 0.4
    pot = PotentialSpec.free(1).with_extra(
        "free+A", extra_vector=lambda g, t: (np.full(g.shape, a0),)
    )
    kin = kinetic_momentum_quantum(psi, params, pot)
    assert kin[0] == pytest.approx(params.hbar * k0 - params.charge * a0, abs=1e-10)


def test_ehrenfest_check_validates_history(grid1d, params):
    psi = madelung_forward(gaussian_state(grid1d, sigma=1.0), params)
    pot = PotentialSpec.harmonic(1.0, 0.0)
    with pytest.raises(ValidationError):
        ehrenfest_check([psi, psi], pot, params)


# ---------------------------------------------------------------------------
# mixtures


def test_mixture_expectation_is_affine(grid1d, params):
    st_a = gaussian_state(grid1d, sigma=1.0, center=-1.0)
    st_b = gaussian_state(grid1d, sigma=1.3, center=1.5)
    psi_a = madelung_forward(st_a, params)
    psi_b = madelung_forward(st_b, params)
    obs = Observable.position(0)
    ea = expect_quantum(psi_a, obs, params)
    eb = expect_quantum(psi_b, obs, params)
    for w in (0.2, 0.5, 0.9):
        dm = DensityMatrix((psi_a, psi_b), np.array([w, 1.0 - w]))
        assert mixture_expectation(dm, obs, params) == pytest.approx(
            w * ea + (1 - w) * eb, abs=1e-12
        )
    flipped = DensityMatrix((psi_b, psi_a), np.array([0.7, 0.3]))
    straight = DensityMatrix((psi_a, psi_b), np.array([0.3, 0.7]))
    assert mixture_expectation(flipped, obs, params) == pytest.approx(
        mixture_expectation(straight, obs, params), abs=1e-14
    )


def test_mixture_weights_validated(grid1d, params):
    psi = madelung_forward(gaussian_state(grid1d), params)
    with pytest.raises(ValidationError):
        DensityMatrix((psi, psi), np.array([0.6, 0.6]))


# ---------------------------------------------------------------------------
# marginals


def test_classical_marginals_recover_density_and_sheet(grid1d, params):
    st = gaussian_state(grid1d, sigma=1.0, slope=0.5)
    pair = marginals_classical(st, params)
    assert np.max(np.abs(pair.position.samples - st.n.samples)) < 1e-12
    assert integrate(pair.momentum) == pytest.approx(1.0, abs=1e-10)
    pgrid = pair.momentum.grid
    p_axis = pgrid.axis(0)
    mean_p = float(np.sum(p_axis * pair.momentum.samples) * pgrid.cell_volume)
    # deposit is nearest-node: mean lands within half a momentum cell
    assert abs(mean_p - 0.5) <= 0.5 * pgrid.spacings[0]


def test_quantum_marginals_match_densities(grid1d, params):
    psi = madelung_forward(gaussian_state(grid1d, sigma=1.0, slope=0.0), params)
    pair = marginals_quantum(psi)
    assert np.max(np.abs(pair.position.samples - psi.density().samples)) < 1e-14
    assert np.max(np.abs(pair.momentum.samples - psi.momentum_density().samples)) < 1e-14


def test_ensemble_marginals_conserve_mass(grid1d, params):
    st = gaussian_state(grid1d, sigma=1.0, slope=0.4)
    ens = sample_ensemble_from_state(st, 5000, seed=9)
    pair = marginals_ensemble(ens, grid1d, params)
    assert integrate(pair.position) == pytest.approx(1.0, abs=1e-12)
    assert integrate(pair.momentum) == pytest.approx(1.0, abs=1e-12)


def test_deposit_overflow_raises_coverage_error(params):
    grid = GridSpec.line(8.0, 64, -4.0)
    st = gaussian_state(grid, sigma=0.6, slope=50.0)  # sheet far outside conjugate box
    with pytest.raises(CoverageError):
        marginals_classical(st, params)


def test_ensemble_observables_match_sample_averages(grid1d, params):
    st = gaussian_state(grid1d, sigma=1.0, center=0.3, slope=0.2)
    ens = sample_ensemble_from_state(st, 2000, seed=4)
    assert expect_ensemble(ens, Observable.position(0), params) == pytest.approx(
        float(ens.q[:, 0].mean()), abs=1e-12
    )
    pot = PotentialSpec.harmonic(1.0, 0.0)
    e = expect_ensemble(ens, Observable.energy(), params, pot)
    manual = float(np.mean(0.5 * ens.p[:, 0] ** 2 + 0.5 * ens.q[:, 0] ** 2))
    assert e == pytest.approx(manual, abs=1e-12)
    table = PotentialSpec.from_table(
        normalized_density(grid1d, np.ones(grid1d.shape))
    )
    with pytest.raises(UnsupportedPotentialError):
        expect_ensemble(ens, Observable.potential(), params, table)


# ---------------------------------------------------------------------------
# conditioning


def test_collapse_confines_and_normalizes(grid1d, params):
    st = gaussian_state(grid1d, sigma=1.5)
    cut = collapse_classical(st, (0.0, 4.0))
    x = grid1d.axis(0)
    assert integrate(cut.n) == pytest.approx(1.0, abs=1e-12)
    assert np.all(cut.n.samples[(x < 0.0) | (x > 4.0)] == 0.0)
    twice = collapse_classical(cut, (0.0, 4.0))
    assert np.max(np.abs(twice.n.samples - cut.n.samples)) < 1e-12


def test_collapse_momentum_window_all_or_nothing(grid1d, params):
    # the sheet value is uniform here, so a window either keeps everything...
    st = gaussian_state(grid1d, sigma=1.0, slope=0.3)
    kept = collapse_classical(st, (0.0, 1.0), which="momentum")
    assert np.max(np.abs(kept.n.samples - st.n.samples)) < 1e-12
    with pytest.raises(ZeroCaptureError):
        collapse_classical(st, (2.0, 3.0), which="momentum")


def test_collapse_quantum_renormalizes(grid1d, params):
    psi = madelung_forward(gaussian_state(grid1d, sigma=1.2), params)
    cut = collapse_quantum(psi, (-1.0, 2.5))
    assert integrate(cut.density()) == pytest.approx(1.0, abs=1e-12)
    x = grid1d.axis(0)
    assert np.all(np.abs(cut.samples[(x < -1.0) | (x > 2.5)]) == 0.0)
