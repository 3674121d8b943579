"""Expectation values on both sides of the classical-quantum bridge.

Classical states carry a delta sheet in the conjugate variable, so first
moments of that variable are read straight off grad S while second moments
acquire the quantum-pressure correction (use_sigma=True):

    <p_a p_b> = integral n [dS_a dS_b + (hbar^2/4)(dn_a dn_b/n^2 + delta_ab beta^2 n^(2/3)/3)]

Conditional moments beyond second order are not determined by sigma^2 and
raise UnsupportedObservableError on the classical side.

Quantum expectations use the standard sesquilinear forms; where beta is
nonzero the same internal-noise corrections are added so that expectation
identities hold exactly between the two sides.  The kinetic and total-energy
observables are gauge invariant (built from D = grad - i(e/hbar)A); bare
momentum moments are canonical and gauge dependent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bridge import (
    WaveFunction,
    covariant_gradient,
    position_grid_for,
    second_moment_tensor,
    sigma_squared,
)
from .classical import ActionField, ParticleEnsemble, PStochasticState, QStochasticState
from .core import (
    ComplexField,
    GridSpec,
    PhysicalParams,
    RealField,
    from_momentum_space,
    integrate,
    periodic_interpolator,
    spectral_gradient,
    to_momentum_space,
)
from .errors import (
    CoverageError,
    UnsupportedObservableError,
    UnsupportedPotentialError,
    ValidationError,
    ZeroCaptureError,
)
from .potentials import PotentialSpec

__all__ = [
    "Observable",
    "expect_classical",
    "expect_classical_p",
    "expect_ensemble",
    "expect_quantum",
    "kinetic_momentum_classical",
    "kinetic_momentum_quantum",
    "variance_classical",
    "variance_quantum",
    "heisenberg_product_classical",
    "heisenberg_product_quantum",
    "ehrenfest_check",
    "DensityMatrix",
    "mixture_expectation",
    "MarginalPair",
    "marginals_classical",
    "marginals_classical_p",
    "marginals_ensemble",
    "marginals_quantum",
    "collapse_classical",
    "collapse_quantum",
]

IMAG_TOLERANCE = 1e-9

_NAME_RE = re.compile(r"^(q|p)(\d+)(?:\^(\d+))?$")


@dataclass(frozen=True)
class Observable:
    """A named phase-space monomial, energy functional, or position-function table."""

    kind: str
    axis: int = 0
    power: int = 1
    table: RealField | None = None

    _KINDS = ("position", "momentum", "kinetic", "potential", "energy", "lz", "lz2", "function")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValidationError(f"unknown observable kind {self.kind!r}")
        if self.axis < 0 or self.power < 1:
            raise ValidationError("axis must be >= 0 and power >= 1")
        if (self.table is not None) != (self.kind == "function"):
            raise ValidationError("a value table is required for (and only for) kind 'function'")

    @classmethod
    def position(cls, axis: int = 0, power: int = 1) -> "Observable":
        return cls("position", axis, power)

    @classmethod
    def momentum(cls, axis: int = 0, power: int = 1) -> "Observable":
        return cls("momentum", axis, power)

    @classmethod
    def kinetic(cls) -> "Observable":
        return cls("kinetic")

    @classmethod
    def potential(cls) -> "Observable":
        return cls("potential")

    @classmethod
    def energy(cls) -> "Observable":
        return cls("energy")

    @classmethod
    def angular_momentum_z(cls) -> "Observable":
        return cls("lz")

    @classmethod
    def angular_momentum_z_squared(cls) -> "Observable":
        return cls("lz2")

    @classmethod
    def function_of_position(cls, table: RealField) -> "Observable":
        """<f(q)> for an arbitrary value table on the full position grid."""
        return cls("function", table=table)

    @classmethod
    def parse(cls, name: str) -> "Observable":
        """Inverse of .name: 'q0', 'p1^2', 'energy', 'lz^2', ..."""
        keywords = {
            "kinetic": cls.kinetic,
            "potential": cls.potential,
            "energy": cls.energy,
            "lz": cls.angular_momentum_z,
            "lz^2": cls.angular_momentum_z_squared,
        }
        if name in keywords:
            return keywords[name]()
        m = _NAME_RE.match(name)
        if not m:
            raise ValidationError(f"cannot parse observable name {name!r}")
        kind = "position" if m.group(1) == "q" else "momentum"
        power = int(m.group(3)) if m.group(3) else 1
        return cls(kind, int(m.group(2)), power)

    @property
    def name(self) -> str:
        if self.kind in ("position", "momentum"):
            letter = "q" if self.kind == "position" else "p"
            suffix = f"^{self.power}" if self.power != 1 else ""
            return f"{letter}{self.axis}{suffix}"
        if self.kind == "lz2":
            return "lz^2"
        if self.kind == "function":
            return "f(q)"
        return self.kind


def _real(value: complex, context: str) -> float:
    if abs(np.imag(value)) > IMAG_TOLERANCE:
        raise AssertionError(
            f"{context}: imaginary part {np.imag(value):.3e} exceeds {IMAG_TOLERANCE}"
        )
    return float(np.real(value))


def _check_axis(grid: GridSpec, obs: Observable) -> None:
    if obs.kind in ("position", "momentum") and obs.axis >= grid.dims:
        raise ValidationError(f"axis {obs.axis} out of range for {grid.dims}D grid")
    if obs.kind in ("lz", "lz2") and grid.dims != 2:
        raise UnsupportedObservableError("angular momentum requires a 2D grid")


def _require_pot(pot: PotentialSpec | None, obs: Observable) -> PotentialSpec:
    if pot is None:
        raise ValidationError(f"observable {obs.name!r} needs the potential")
    return pot


def _table_values(obs: Observable, grid: GridSpec) -> np.ndarray:
    assert obs.table is not None
    if obs.table.grid != grid:
        raise ValidationError("function table is not defined on the state's grid")
    return obs.table.samples


def _beta_density_integral(n: np.ndarray, grid: GridSpec, weight=None) -> float:
    """integral weight * n^(5/3) dq (weight defaults to 1)."""
    vals = np.cbrt(np.clip(n, 0.0, None) ** 5)
    if weight is not None:
        vals = vals * weight
    return float(integrate(RealField(grid, vals)))


# ---------------------------------------------------------------------------
# classical side


def _sheet_moment(
    n: RealField,
    S: ActionField,
    params: PhysicalParams,
    obs: Observable,
    use_sigma: bool,
) -> float:
    """<g_axis^power> against the delta sheet g = grad S, with corrections."""
    grid = n.grid
    if obs.power == 1:
        g = S.gradient_values()[obs.axis]
        return float(integrate(RealField(grid, g * n.samples)))
    if obs.power == 2:
        if use_sigma:
            tensor = second_moment_tensor(n, S, params)
            vals = tensor[obs.axis, obs.axis]
        else:
            g = S.gradient_values()[obs.axis]
            vals = g * g
        return float(integrate(RealField(grid, vals * n.samples)))
    raise UnsupportedObservableError(
        "conditional moments beyond second order are not determined by sigma^2"
    )


def expect_classical(
    state: QStochasticState,
    obs: Observable,
    params: PhysicalParams,
    pot: PotentialSpec | None = None,
    use_sigma: bool = True,
) -> float:
    """Expectation against rho(q, p) = n(q) delta(p - grad S)."""
    grid = state.grid
    _check_axis(grid, obs)
    n = state.n
    coords = grid.meshes()

    if obs.kind == "position":
        vals = coords[obs.axis] ** obs.power
        return float(integrate(RealField(grid, vals * n.samples)))
    if obs.kind == "function":
        return float(integrate(RealField(grid, _table_values(obs, grid) * n.samples)))
    if obs.kind == "momentum":
        return _sheet_moment(n, state.S, params, obs, use_sigma)
    if obs.kind == "kinetic":
        total = 0.0
        for axis in range(grid.dims):
            total += _sheet_moment(
                n, state.S, params, Observable.momentum(axis, 2), use_sigma
            )
        return total / (2.0 * params.mass)
    if obs.kind == "potential":
        pot = _require_pot(pot, obs)
        v = pot.values_on(grid, state.time).samples
        return float(integrate(RealField(grid, v * n.samples)))
    if obs.kind == "energy":
        pot = _require_pot(pot, obs)
        g = state.S.gradient_values()
        a_vals = pot.vector_values(grid, state.time)
        kin = np.zeros(grid.shape)
        for axis in range(grid.dims):
            gi = g[axis] if a_vals is None else g[axis] - params.charge * a_vals[axis]
            kin += gi * gi
        dens = kin / (2.0 * params.mass)
        if use_sigma:
            dens = dens + sigma_squared(n, params).samples / (2.0 * params.mass)
        dens = dens + pot.values_on(grid, state.time).samples
        return float(integrate(RealField(grid, dens * n.samples)))
    if obs.kind == "lz":
        g = state.S.gradient_values()
        vals = coords[0] * g[1] - coords[1] * g[0]
        return float(integrate(RealField(grid, vals * n.samples)))
    # lz2: contract the second-moment tensor with the lever arms
    if use_sigma:
        tensor = second_moment_tensor(n, state.S, params)
        t00, t01, t11 = tensor[0, 0], tensor[0, 1], tensor[1, 1]
    else:
        g = state.S.gradient_values()
        t00, t01, t11 = g[0] * g[0], g[0] * g[1], g[1] * g[1]
    vals = coords[0] ** 2 * t11 - 2.0 * coords[0] * coords[1] * t01 + coords[1] ** 2 * t00
    return float(integrate(RealField(grid, vals * n.samples)))


def expect_classical_p(
    state: PStochasticState,
    obs: Observable,
    params: PhysicalParams,
    pot: PotentialSpec | None = None,
    use_sigma: bool = True,
) -> float:
    """Expectation against rho(q, p) = n(p) delta(q - grad S); roles swap."""
    grid = state.grid
    _check_axis(grid, obs)
    n = state.n
    coords = grid.meshes()

    if obs.kind == "function":
        raise UnsupportedObservableError(
            "general position functions are not computable for the momentum family"
        )
    if obs.kind == "momentum":
        vals = coords[obs.axis] ** obs.power
        return float(integrate(RealField(grid, vals * n.samples)))
    if obs.kind == "position":
        return _sheet_moment(n, state.S, params, Observable.momentum(obs.axis, obs.power), use_sigma)
    if obs.kind == "kinetic":
        total = np.zeros(grid.shape)
        for axis in range(grid.dims):
            total = total + coords[axis] ** 2
        return float(integrate(RealField(grid, total * n.samples))) / (2.0 * params.mass)
    if obs.kind in ("potential", "energy"):
        pot = _require_pot(pot, obs)
        if pot.periodic is not None or pot.has_vector:
            raise UnsupportedPotentialError(
                "momentum-family potential moments need a polynomial potential"
            )
        mean_q = np.array(
            [
                _sheet_moment(n, state.S, params, Observable.momentum(a, 1), use_sigma)
                for a in range(grid.dims)
            ]
        )
        if use_sigma:
            tensor = second_moment_tensor(n, state.S, params)
        else:
            g = state.S.gradient_values()
            tensor = np.array([[g[i] * g[j] for j in range(grid.dims)] for i in range(grid.dims)])
        second = np.array(
            [
                [float(integrate(RealField(grid, tensor[i, j] * n.samples))) for j in range(grid.dims)]
                for i in range(grid.dims)
            ]
        )
        v_mean = 0.5 * float(np.sum(pot.quad * second)) + float(pot.lin @ mean_q) + pot.const
        if obs.kind == "potential":
            return v_mean
        return v_mean + expect_classical_p(state, Observable.kinetic(), params, pot, use_sigma)
    raise UnsupportedObservableError(
        "angular momentum is not defined for the momentum family"
    )


def expect_ensemble(
    ens: ParticleEnsemble,
    obs: Observable,
    params: PhysicalParams,
    pot: PotentialSpec | None = None,
) -> float:
    """Weighted sample average over phase-space particles.

    Samples carry no sheet structure, so every moment is the bare average;
    there is no sigma^2 correction to apply.  Potential and energy averages
    need the polynomial part only (periodic remainders are tabulated on grids,
    not at particle positions).
    """
    q, p, w = ens.q, ens.p, ens.w
    if obs.axis >= ens.dims:
        raise ValidationError(f"axis {obs.axis} out of range for {ens.dims}D ensemble")
    if obs.kind == "position":
        return float(w @ q[:, obs.axis] ** obs.power)
    if obs.kind == "momentum":
        return float(w @ p[:, obs.axis] ** obs.power)
    if obs.kind == "kinetic":
        return float(w @ np.sum(p * p, axis=1)) / (2.0 * params.mass)
    if obs.kind in ("potential", "energy"):
        pot = _require_pot(pot, obs)
        if pot.periodic is not None or pot.has_vector:
            raise UnsupportedPotentialError(
                "ensemble potential moments need a polynomial potential"
            )
        v = 0.5 * np.einsum("mi,ij,mj->m", q, pot.quad, q) + q @ pot.lin + pot.const
        v_mean = float(w @ v)
        if obs.kind == "potential":
            return v_mean
        return v_mean + expect_ensemble(ens, Observable.kinetic(), params, pot)
    if obs.kind in ("lz", "lz2"):
        if ens.dims != 2:
            raise UnsupportedObservableError("angular momentum requires a 2D ensemble")
        lz = q[:, 0] * p[:, 1] - q[:, 1] * p[:, 0]
        return float(w @ (lz * lz if obs.kind == "lz2" else lz))
    if obs.kind == "function":
        table = obs.table
        if table.grid.dims != ens.dims:
            raise ValidationError("observable table dimensionality does not match ensemble")
        interp = periodic_interpolator(table)
        pts = q[:, 0] if ens.dims == 1 else q
        return float(w @ interp(pts))
    raise UnsupportedObservableError(f"unhandled observable kind {obs.kind!r}")


# ---------------------------------------------------------------------------
# quantum side


def expect_quantum(
    psi: WaveFunction,
    obs: Observable,
    params: PhysicalParams,
    pot: PotentialSpec | None = None,
) -> float:
    grid = psi.grid
    _check_axis(grid, obs)
    cell = grid.cell_volume
    vals = psi.samples
    n = np.abs(vals) ** 2
    coords = grid.meshes()
    beta2 = params.beta**2

    if obs.kind == "position":
        w = coords[obs.axis] ** obs.power
        return float(integrate(RealField(grid, w * n)))
    if obs.kind == "function":
        return float(integrate(RealField(grid, _table_values(obs, grid) * n)))
    if obs.kind == "momentum":
        if obs.power == 1:
            g = spectral_gradient(psi.field, obs.axis).samples
            raw = -1j * params.hbar * np.sum(np.conj(vals) * g) * cell
            return _real(raw, "<p>")
        if obs.power == 2:
            g = spectral_gradient(psi.field, obs.axis).samples
            out = params.hbar**2 * float(np.sum(np.abs(g) ** 2) * cell)
            if beta2:
                out += beta2 * params.hbar**2 / 12.0 * _beta_density_integral(n, grid)
            return out
        hat = psi.momentum_representation()
        pgrid = hat.grid
        w = pgrid.meshes()[obs.axis] ** obs.power
        return float(integrate(RealField(pgrid, w * np.abs(hat.samples) ** 2)))
    if obs.kind == "kinetic":
        dpsi = covariant_gradient(psi, pot, params)
        total = 0.0
        for comp in dpsi:
            total += float(np.sum(np.abs(comp.samples) ** 2) * cell)
        out = params.hbar**2 / (2.0 * params.mass) * total
        if beta2:
            out += (
                grid.dims
                * beta2
                * params.hbar**2
                / (24.0 * params.mass)
                * _beta_density_integral(n, grid)
            )
        return out
    if obs.kind == "potential":
        pot = _require_pot(pot, obs)
        v = pot.values_on(grid, psi.time).samples
        return float(integrate(RealField(grid, v * n)))
    if obs.kind == "energy":
        pot = _require_pot(pot, obs)
        dpsi = covariant_gradient(psi, pot, params)
        total = 0.0
        for comp in dpsi:
            total += float(np.sum(np.abs(comp.samples) ** 2) * cell)
        out = params.hbar**2 / (2.0 * params.mass) * total
        v = pot.values_on(grid, psi.time).samples
        out += float(integrate(RealField(grid, v * n)))
        if beta2:
            out += (
                beta2 * params.hbar**2 / (8.0 * params.mass) * _beta_density_integral(n, grid)
            )
        return out
    g0 = spectral_gradient(psi.field, 0).samples
    g1 = spectral_gradient(psi.field, 1).samples
    l_vals = -1j * params.hbar * (coords[0] * g1 - coords[1] * g0)
    if obs.kind == "lz":
        raw = np.sum(np.conj(vals) * l_vals) * cell
        return _real(raw, "<lz>")
    out = float(np.sum(np.abs(l_vals) ** 2) * cell)
    if beta2:
        lever = coords[0] ** 2 + coords[1] ** 2
        out += beta2 * params.hbar**2 / 12.0 * _beta_density_integral(n, grid, lever)
    return out


# ---------------------------------------------------------------------------
# spreads and dynamics checks


def variance_classical(
    state: QStochasticState,
    obs: Observable,
    params: PhysicalParams,
    pot: PotentialSpec | None = None,
    use_sigma: bool = True,
) -> float:
    if obs.kind not in ("position", "momentum") or obs.power != 1:
        raise ValidationError("variance is defined for first-power position/momentum")
    mean = expect_classical(state, obs, params, pot, use_sigma)
    sq = expect_classical(
        state, Observable(obs.kind, obs.axis, 2), params, pot, use_sigma
    )
    return sq - mean**2


def variance_quantum(
    psi: WaveFunction,
    obs: Observable,
    params: PhysicalParams,
    pot: PotentialSpec | None = None,
) -> float:
    if obs.kind not in ("position", "momentum") or obs.power != 1:
        raise ValidationError("variance is defined for first-power position/momentum")
    mean = expect_quantum(psi, obs, params, pot)
    sq = expect_quantum(psi, Observable(obs.kind, obs.axis, 2), params, pot)
    return sq - mean**2


def heisenberg_product_classical(
    state: QStochasticState,
    params: PhysicalParams,
    axis: int = 0,
    use_sigma: bool = True,
) -> float:
    """Delta q * Delta p; >= hbar/2 whenever sigma corrections are on."""
    vq = variance_classical(state, Observable.position(axis), params, use_sigma=use_sigma)
    vp = variance_classical(state, Observable.momentum(axis), params, use_sigma=use_sigma)
    return float(np.sqrt(max(vq, 0.0) * max(vp, 0.0)))


def heisenberg_product_quantum(
    psi: WaveFunction, params: PhysicalParams, axis: int = 0
) -> float:
    vq = variance_quantum(psi, Observable.position(axis), params)
    vp = variance_quantum(psi, Observable.momentum(axis), params)
    return float(np.sqrt(max(vq, 0.0) * max(vp, 0.0)))


def kinetic_momentum_quantum(
    psi: WaveFunction, params: PhysicalParams, pot: PotentialSpec | None = None
) -> np.ndarray:
    """<p - eA> per axis, the gauge-invariant momentum hbar Im(conj(psi) D psi)."""
    grid = psi.grid
    cell = grid.cell_volume
    comps = covariant_gradient(psi, pot, params)
    out = np.empty(grid.dims)
    for axis, comp in enumerate(comps):
        raw = -1j * params.hbar * np.sum(np.conj(psi.samples) * comp.samples) * cell
        out[axis] = _real(raw, "<p - eA>")
    return out


def kinetic_momentum_classical(
    state: QStochasticState, params: PhysicalParams, pot: PotentialSpec | None = None
) -> np.ndarray:
    """integral n (grad S - eA) per axis."""
    grid = state.grid
    g = state.S.gradient_values()
    a_vals = pot.vector_values(grid, state.time) if pot is not None else None
    out = np.empty(grid.dims)
    for axis in range(grid.dims):
        gi = g[axis] if a_vals is None else g[axis] - params.charge * a_vals[axis]
        out[axis] = float(integrate(RealField(grid, gi * state.n.samples)))
    return out


def _density_values(snap: WaveFunction | QStochasticState) -> np.ndarray:
    if isinstance(snap, WaveFunction):
        return np.abs(snap.samples) ** 2
    return snap.n.samples


def _mean_q_p(
    snap: WaveFunction | QStochasticState, axis: int, params: PhysicalParams
) -> tuple[float, float]:
    q_obs = Observable.position(axis)
    p_obs = Observable.momentum(axis)
    if isinstance(snap, WaveFunction):
        return expect_quantum(snap, q_obs, params), expect_quantum(snap, p_obs, params)
    return (
        expect_classical(snap, q_obs, params),
        expect_classical(snap, p_obs, params),
    )


def ehrenfest_check(
    history: Sequence[WaveFunction | QStochasticState],
    pot: PotentialSpec,
    params: PhysicalParams,
) -> dict[str, np.ndarray]:
    """Residuals of d<q>/dt = <p>/m and d<p>/dt = -<grad V> along a history.

    Works on wavefunction or classical-state snapshots (not mixed).  Time
    derivatives are centered differences at the interior snapshots; returns
    arrays of shape (T-2, d) plus the interior times.
    """
    if len(history) < 3:
        raise ValidationError("need at least three snapshots")
    first = history[0]
    if any(type(s) is not type(first) for s in history[1:]):
        raise ValidationError("history mixes state types")
    grid = first.grid
    if any(s.grid != grid for s in history[1:]):
        raise ValidationError("snapshots live on different grids")
    if pot.has_vector:
        raise UnsupportedPotentialError("Ehrenfest residuals assume A = 0")
    times = np.array([s.time for s in history])
    dts = np.diff(times)
    if np.any(dts <= 0.0) or float(np.max(np.abs(dts - dts[0]))) > 1e-9 * float(dts[0]):
        raise ValidationError("snapshots must be uniformly spaced in time")
    d = grid.dims
    means = np.array(
        [[_mean_q_p(s, axis, params) for axis in range(d)] for s in history]
    )  # (T, d, 2)
    r_q = np.empty((len(history) - 2, d))
    r_p = np.empty((len(history) - 2, d))
    for k in range(1, len(history) - 1):
        span = times[k + 1] - times[k - 1]
        n_mid = _density_values(history[k])
        grad_v = pot.gradient_on(grid, times[k])
        for axis in range(d):
            dq = (means[k + 1, axis, 0] - means[k - 1, axis, 0]) / span
            dp = (means[k + 1, axis, 1] - means[k - 1, axis, 1]) / span
            f_mid = float(integrate(RealField(grid, grad_v[axis] * n_mid)))
            r_q[k - 1, axis] = dq - means[k, axis, 1] / params.mass
            r_p[k - 1, axis] = dp + f_mid
    return {"times": times[1:-1], "position": r_q, "momentum": r_p}


# ---------------------------------------------------------------------------
# mixtures


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Convex mixture of pure states on a shared grid."""

    members: tuple[WaveFunction, ...]
    weights: np.ndarray

    def __post_init__(self):
        if not self.members:
            raise ValidationError("mixture needs at least one member")
        grid = self.members[0].grid
        if any(m.grid != grid for m in self.members):
            raise ValidationError("mixture members live on different grids")
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(w) != len(self.members):
            raise ValidationError("one weight per member required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must be non-negative and sum to 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def grid(self) -> GridSpec:
        return self.members[0].grid

    def density(self) -> RealField:
        out = np.zeros(self.grid.shape)
        for w, m in zip(self.weights, self.members):
            out += w * np.abs(m.samples) ** 2
        return RealField(self.grid, out)


def mixture_expectation(
    dm: DensityMatrix,
    obs: Observable,
    params: PhysicalParams,
    pot: PotentialSpec | None = None,
) -> float:
    return float(
        sum(
            w * expect_quantum(m, obs, params, pot)
            for w, m in zip(dm.weights, dm.members)
        )
    )


# ---------------------------------------------------------------------------
# marginals


@dataclass(frozen=True, eq=False)
class MarginalPair:
    """Position and momentum densities of one state."""

    position: RealField
    momentum: RealField


def _deposit(
    target: GridSpec, points: list[np.ndarray], masses: np.ndarray, coverage_tol: float
) -> RealField:
    """Nearest-node deposition of point masses onto a grid."""
    d = target.dims
    flat_masses = masses.reshape(-1)
    idx = []
    inside = np.ones(flat_masses.shape, dtype=bool)
    for axis in range(d):
        j = np.rint((points[axis].reshape(-1) - target.origins[axis]) / target.spacings[axis])
        inside &= (j >= 0) & (j < target.points[axis])
        idx.append(j)
    overflow = float(flat_masses[~inside].sum())
    if overflow > coverage_tol:
        raise CoverageError(
            f"{overflow:.3e} of the mass falls outside the target grid",
            overflow_mass=overflow,
        )
    out = np.zeros(target.shape)
    kept = tuple(j[inside].astype(int) for j in idx)
    np.add.at(out, kept, flat_masses[inside])
    return RealField(target, out / target.cell_volume)


def marginals_classical(
    state: QStochasticState,
    params: PhysicalParams,
    coverage_tol: float = 1e-8,
) -> MarginalPair:
    """Position marginal is n itself; momentum marginal bins the sheet."""
    grid = state.grid
    target = grid.momentum_grid(params.hbar)
    g = state.S.gradient_values()
    masses = state.n.samples * grid.cell_volume
    momentum = _deposit(target, g, masses, coverage_tol)
    return MarginalPair(position=state.n, momentum=momentum)


def marginals_classical_p(
    state: PStochasticState,
    params: PhysicalParams,
    position_grid: GridSpec | None = None,
    coverage_tol: float = 1e-8,
) -> MarginalPair:
    """Momentum marginal is n itself; the sheet q = grad S is binned."""
    grid = state.grid
    target = position_grid or position_grid_for(grid, params.hbar)
    if target.momentum_grid(params.hbar) != grid:
        raise ValidationError("position grid is not conjugate to the state grid")
    g = state.S.gradient_values()
    masses = state.n.samples * grid.cell_volume
    position = _deposit(target, g, masses, coverage_tol)
    return MarginalPair(position=position, momentum=state.n)


def marginals_ensemble(
    ens: ParticleEnsemble,
    grid: GridSpec,
    params: PhysicalParams,
    coverage_tol: float = 1e-8,
) -> MarginalPair:
    """Histogram particles onto a position grid and its conjugate momentum grid."""
    if grid.dims != ens.dims:
        raise ValidationError("grid dimensionality does not match the ensemble")
    q_cols = [ens.q[:, i] for i in range(ens.dims)]
    p_cols = [ens.p[:, i] for i in range(ens.dims)]
    position = _deposit(grid, q_cols, ens.w, coverage_tol)
    momentum = _deposit(grid.momentum_grid(params.hbar), p_cols, ens.w, coverage_tol)
    return MarginalPair(position=position, momentum=momentum)


def marginals_quantum(psi: WaveFunction) -> MarginalPair:
    return MarginalPair(position=psi.density(), momentum=psi.momentum_density())


# ---------------------------------------------------------------------------
# conditioning (measurement windows)


def _as_windows(windows, dims: int) -> list[tuple[float, float]]:
    if dims == 1 and len(windows) == 2 and np.isscalar(windows[0]):
        windows = [windows]
    out = []
    for w in windows:
        lo, hi = float(w[0]), float(w[1])
        if hi <= lo:
            raise ValidationError("window upper edge must exceed the lower edge")
        out.append((lo, hi))
    if len(out) != dims:
        raise ValidationError(f"need one window per axis ({dims})")
    return out


def _window_mask(values: list[np.ndarray], windows) -> np.ndarray:
    mask = np.ones(values[0].shape, dtype=bool)
    for v, (lo, hi) in zip(values, windows):
        mask &= (v >= lo) & (v < hi)
    return mask


def collapse_classical(
    state: QStochasticState,
    windows,
    which: str = "position",
    min_capture: float = 1e-12,
) -> QStochasticState:
    """Condition on finding the system inside a phase-space window.

    Position windows cut n directly; momentum windows cut the cells whose
    sheet value grad S falls inside.  The action is unchanged.  The cut
    density has hard edges, so downstream spectral operations on the result
    carry Gibbs error; that is a property of conditioning, not a bug.
    """
    grid = state.grid
    wins = _as_windows(windows, grid.dims)
    if which == "position":
        ref = list(grid.meshes())
    elif which == "momentum":
        ref = state.S.gradient_values()
    else:
        raise ValidationError("which must be 'position' or 'momentum'")
    mask = _window_mask(ref, wins)
    cut = np.where(mask, np.clip(state.n.samples, 0.0, None), 0.0)
    captured = float(cut.sum() * grid.cell_volume)
    if captured < min_capture:
        raise ZeroCaptureError(
            f"window captured probability {captured:.3e} (< {min_capture:.0e})"
        )
    return QStochasticState(RealField(grid, cut / captured), state.S, state.time)


def collapse_quantum(
    psi: WaveFunction,
    windows,
    which: str = "position",
    min_capture: float = 1e-12,
) -> WaveFunction:
    """Project onto a position or momentum window and renormalize."""
    grid = psi.grid
    wins = _as_windows(windows, grid.dims)
    if which == "position":
        mask = _window_mask(list(grid.meshes()), wins)
        cut = np.where(mask, psi.samples, 0.0)
        captured = float(np.sum(np.abs(cut) ** 2) * grid.cell_volume)
        if captured < min_capture:
            raise ZeroCaptureError(
                f"window captured probability {captured:.3e} (< {min_capture:.0e})"
            )
        return WaveFunction(ComplexField(grid, cut / np.sqrt(captured)), psi.params, psi.time)
    if which != "momentum":
        raise ValidationError("which must be 'position' or 'momentum'")
    hbar = psi.params.hbar
    hat = to_momentum_space(psi.field, hbar)
    mask = _window_mask(list(hat.grid.meshes()), wins)
    cut = np.where(mask, hat.samples, 0.0)
    captured = float(np.sum(np.abs(cut) ** 2) * hat.grid.cell_volume)
    if captured < min_capture:
        raise ZeroCaptureError(
            f"window captured probability {captured:.3e} (< {min_capture:.0e})"
        )
    back = from_momentum_space(ComplexField(hat.grid, cut), grid, hbar)
    return WaveFunction.normalized(grid, back.samples, psi.params, psi.time)
