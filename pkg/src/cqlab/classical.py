"""Classical phase-space states and their evolution.

Two exact-solution families are supported.  The position family carries a
probability density n(q) and an action S(q) whose gradient is the momentum
sheet p = dS/dq; it obeys the continuity + Hamilton-Jacobi pair.  The
momentum family is the conjugate construction, q = dS/dp, and is restricted
to free, uniform-field, and harmonic potentials because only then does the
Hamiltonian stay polynomial in the conjugate coordinate.

Actions are stored as a quadratic polynomial plus a periodic residual

    S(q) = 1/2 q . quad . q + lin . q + const + S_per(q)

The polynomial coefficients evolve by Riccati-type ODEs; only S_per sees
spectral derivatives.  This keeps linear carriers (plane-wave-like S = p0 q)
and focusing/defocusing quadratic phases exact on a periodic box.

Both families reduce to one integrator: the momentum-side system is the
position-side system under (q, p) -> (p, -q), i.e. the generalized
Hamiltonian H~(g, x) = -x^2/2m - V(g).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import (
    GridSpec,
    PhysicalParams,
    RealField,
    edge_mass_fraction,
    integrate,
    periodic_interpolator,
    spectral_gradient,
)
from .errors import CausticError, UnsupportedPotentialError, ValidationError
from .potentials import PotentialSpec

__all__ = [
    "ActionField",
    "QStochasticState",
    "PStochasticState",
    "ParticleEnsemble",
    "TrajectoryBundle",
    "normalized_density",
    "evolve_q_state",
    "evolve_p_state",
    "liouville_evolve_ensemble",
    "sample_ensemble_from_state",
    "classical_trajectories",
    "lagrangian_density",
    "hj_time_derivative",
    "action_time_stencil",
]

DENSITY_NEGATIVE_FLOOR = -1e-8
HESSIAN_FACTOR = 1e3
CFL_FRACTION = 0.2


# ---------------------------------------------------------------------------
# action representation


@dataclass(frozen=True, eq=False)
class ActionField:
    """Quadratic polynomial plus periodic residual on a grid."""

    periodic: RealField
    quad: np.ndarray
    lin: np.ndarray
    const: float = 0.0

    def __post_init__(self):
        d = self.periodic.grid.dims
        quad = np.array(self.quad, dtype=float)
        lin = np.array(self.lin, dtype=float)
        if quad.shape != (d, d):
            raise ValidationError(f"quad must be ({d},{d})")
        if not np.allclose(quad, quad.T):
            raise ValidationError("quad must be symmetric")
        if lin.shape != (d,):
            raise ValidationError(f"lin must have shape ({d},)")
        quad.flags.writeable = False
        lin.flags.writeable = False
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "lin", lin)
        object.__setattr__(self, "const", float(self.const))

    @property
    def grid(self) -> GridSpec:
        return self.periodic.grid

    @classmethod
    def zero(cls, grid: GridSpec) -> "ActionField":
        d = grid.dims
        return cls(RealField.zeros(grid), np.zeros((d, d)), np.zeros(d), 0.0)

    @classmethod
    def linear(cls, grid: GridSpec, slope, const: float = 0.0) -> "ActionField":
        d = grid.dims
        lin = np.atleast_1d(np.asarray(slope, dtype=float))
        if lin.shape != (d,):
            raise ValidationError("slope must have one entry per axis")
        return cls(RealField.zeros(grid), np.zeros((d, d)), lin, const)

    @classmethod
    def from_parts(
        cls,
        grid: GridSpec,
        periodic: RealField | np.ndarray | None = None,
        quad=None,
        lin=None,
        const: float = 0.0,
    ) -> "ActionField":
        d = grid.dims
        if periodic is None:
            per = RealField.zeros(grid)
        elif isinstance(periodic, RealField):
            per = periodic
        else:
            per = RealField(grid, np.asarray(periodic, dtype=float))
        quad = np.zeros((d, d)) if quad is None else np.atleast_2d(np.asarray(quad, dtype=float))
        lin = np.zeros(d) if lin is None else np.atleast_1d(np.asarray(lin, dtype=float))
        return cls(per, quad, lin, const)

    def poly_gradient_values(self) -> list[np.ndarray]:
        coords = self.grid.meshes()
        d = self.grid.dims
        return [self.lin[i] + sum(self.quad[i, j] * coords[j] for j in range(d)) for i in range(d)]

    def gradient_values(self) -> list[np.ndarray]:
        """dS/dq_i sampled on the grid (polynomial part exact)."""
        out = self.poly_gradient_values()
        for i in range(self.grid.dims):
            out[i] = out[i] + spectral_gradient(self.periodic, i).samples
        return out

    def gradient_at(self, points: np.ndarray) -> np.ndarray:
        """dS/dq at arbitrary positions: (M,) in 1D, (M, d) otherwise."""
        d = self.grid.dims
        pts = np.asarray(points, dtype=float)
        if d == 1:
            flat = pts.reshape(-1)
            out = self.lin[0] + self.quad[0, 0] * flat
            if np.any(self.periodic.samples):
                interp = periodic_interpolator(spectral_gradient(self.periodic, 0))
                out = out + interp(flat)
            return out.reshape(pts.shape)
        flat = pts.reshape(-1, d)
        out = flat @ self.quad.T + self.lin
        if np.any(self.periodic.samples):
            for i in range(d):
                interp = periodic_interpolator(spectral_gradient(self.periodic, i))
                out[:, i] += interp(flat)
        return out.reshape(pts.shape)

    def total_values(self) -> np.ndarray:
        """S sampled on the grid.  A value table: not periodic in general."""
        coords = self.grid.meshes()
        d = self.grid.dims
        out = self.periodic.samples + self.const
        for i in range(d):
            out = out + self.lin[i] * coords[i]
            for j in range(d):
                out = out + 0.5 * self.quad[i, j] * coords[i] * coords[j]
        return out

    def hessian_values(self) -> dict[tuple[int, int], np.ndarray]:
        d = self.grid.dims
        out = {}
        for i in range(d):
            for j in range(i, d):
                sij = spectral_gradient(spectral_gradient(self.periodic, i), j).samples
                out[(i, j)] = self.quad[i, j] + sij
        return out

    def max_curvature(self) -> float:
        return max(float(np.max(np.abs(v))) for v in self.hessian_values().values())

    def add_periodic(self, extra: RealField | np.ndarray) -> "ActionField":
        arr = extra.samples if isinstance(extra, RealField) else np.asarray(extra, dtype=float)
        return replace(self, periodic=RealField(self.grid, self.periodic.samples + arr))

    def add_const(self, c: float) -> "ActionField":
        return replace(self, const=self.const + float(c))

    def pinned(self, ref: tuple[int, ...] | None = None) -> "ActionField":
        """Normalize the representation: periodic residual zero at the reference node."""
        ref = ref or (0,) * self.grid.dims
        offset = float(self.periodic.samples[ref])
        if offset == 0.0:
            return self
        return ActionField(
            RealField(self.grid, self.periodic.samples - offset),
            self.quad,
            self.lin,
            self.const + offset,
        )


def normalized_density(grid: GridSpec, values: np.ndarray) -> RealField:
    field = RealField(grid, np.asarray(values, dtype=float))
    total = integrate(field)
    if total <= 0:
        raise ValidationError("density must have positive total mass")
    return RealField(grid, field.samples / total)


def _coerce_action(grid: GridSpec, S) -> ActionField:
    if isinstance(S, ActionField):
        if S.grid != grid:
            raise ValidationError("action and density live on different grids")
        return S
    if isinstance(S, RealField):
        return ActionField.from_parts(grid, periodic=S)
    return ActionField.from_parts(grid, periodic=np.asarray(S, dtype=float))


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class QStochasticState:
    """Position-family exact state: rho(q, p) = n(q) delta(p - dS/dq)."""

    n: RealField
    S: ActionField
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "S", _coerce_action(self.n.grid, self.S).pinned())
        if float(self.n.samples.min()) < DENSITY_NEGATIVE_FLOOR:
            raise ValidationError("density has negative values beyond tolerance")
        total = integrate(self.n)
        if abs(total - 1.0) > 1e-8:
            raise ValidationError(f"density must integrate to 1 (got {total!r})")

    @property
    def grid(self) -> GridSpec:
        return self.n.grid


@dataclass(frozen=True, eq=False)
class PStochasticState:
    """Momentum-family exact state: rho(q, p) = n(p) delta(q - dS/dp)."""

    n: RealField
    S: ActionField
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "S", _coerce_action(self.n.grid, self.S).pinned())
        if float(self.n.samples.min()) < DENSITY_NEGATIVE_FLOOR:
            raise ValidationError("density has negative values beyond tolerance")
        total = integrate(self.n)
        if abs(total - 1.0) > 1e-8:
            raise ValidationError(f"density must integrate to 1 (got {total!r})")

    @property
    def grid(self) -> GridSpec:
        return self.n.grid


def _as_points(arr, dims: int) -> np.ndarray:
    pts = np.asarray(arr, dtype=float)
    if dims == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != dims:
        raise ValidationError(f"expected points of shape (M, {dims})")
    return pts


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    """Weighted phase-space samples; weights are conserved by evolution."""

    q: np.ndarray
    p: np.ndarray
    w: np.ndarray
    time: float = 0.0
    dims: int = 1

    def __post_init__(self):
        q = _as_points(self.q, self.dims)
        p = _as_points(self.p, self.dims)
        w = np.asarray(self.w, dtype=float).reshape(-1)
        if not (len(q) == len(p) == len(w)):
            raise ValidationError("q, p, w must have equal length")
        if np.any(w < 0):
            raise ValidationError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must sum to 1 within 1e-12")
        for a in (q, p, w):
            a.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "w", w)

    @property
    def count(self) -> int:
        return len(self.w)

    def mean_q(self) -> np.ndarray:
        return self.w @ self.q

    def mean_p(self) -> np.ndarray:
        return self.w @ self.p


@dataclass(frozen=True, eq=False)
class TrajectoryBundle:
    """Characteristic curves q(t), with p(t) = dS/dq(q(t), t) along each."""

    times: np.ndarray
    positions: np.ndarray  # (K, M, d)
    momenta: np.ndarray  # (K, M, d)
    potential_tag: str = ""
    source: "QStochasticState | None" = None


# ---------------------------------------------------------------------------
# the generalized Hamilton-Jacobi integrator


@dataclass(frozen=True)
class _HJProblem:
    """H(g, x) = 1/2 g.M.g + w.g + 1/2 x.Pq.x + Pl.x + Pc + Per(x, t)."""

    mass_matrix: np.ndarray  # (d, d)
    drift: np.ndarray  # (d,)
    pot_quad: np.ndarray  # (d, d)
    pot_lin: np.ndarray  # (d,)
    pot_const: float
    pot_periodic: Callable[[GridSpec, float], np.ndarray] | None


def _q_side_problem(pot: PotentialSpec, params: PhysicalParams) -> _HJProblem:
    d = pot.dims
    return _HJProblem(
        mass_matrix=np.eye(d) / params.mass,
        drift=np.zeros(d),
        pot_quad=pot.quad,
        pot_lin=pot.lin,
        pot_const=pot.const,
        pot_periodic=pot.periodic,
    )


def _p_side_problem(pot: PotentialSpec, params: PhysicalParams) -> _HJProblem:
    # (q, p) -> (p, -q): H~(g, x) = -x^2/2m - V(g); V must be polynomial in g.
    d = pot.dims
    return _HJProblem(
        mass_matrix=-pot.quad,
        drift=-pot.lin,
        pot_quad=-np.eye(d) / params.mass,
        pot_lin=np.zeros(d),
        pot_const=-pot.const,
        pot_periodic=None,
    )


def _hj_rhs(grid: GridSpec, coords, y, prob: _HJProblem, t: float):
    n, sper, quad, lin, const = y
    d = grid.dims
    M = prob.mass_matrix
    w = prob.drift

    per_field = RealField(grid, sper)
    gper = [spectral_gradient(per_field, i).samples for i in range(d)]
    gpoly = [lin[i] + sum(quad[i, j] * coords[j] for j in range(d)) for i in range(d)]

    # continuity: dn/dt = -div(n v), v = M (gpoly + gper) + w
    n_field_grid = grid
    dn = np.zeros(grid.shape)
    for i in range(d):
        v_i = w[i] + sum(M[i, j] * (gpoly[j] + gper[j]) for j in range(d))
        flux = RealField(n_field_grid, n * v_i)
        dn = dn - spectral_gradient(flux, i).samples

    # residual action: cross and quadratic residual terms plus periodic potential
    cross = np.zeros(grid.shape)
    for i in range(d):
        for j in range(d):
            cross = cross + M[i, j] * (gpoly[i] * gper[j] + 0.5 * gper[i] * gper[j])
        cross = cross + w[i] * gper[i]
    dsper = -cross
    if prob.pot_periodic is not None:
        dsper = dsper - np.asarray(prob.pot_periodic(grid, t), dtype=float)

    # polynomial coefficients (Riccati family)
    dquad = -(quad @ M @ quad) - prob.pot_quad
    dlin = -(quad @ M @ lin) - quad @ w - prob.pot_lin
    dconst = -0.5 * float(lin @ M @ lin) - float(w @ lin) - prob.pot_const

    return dn, dsper, dquad, dlin, dconst


def _add(y, k, h):
    return tuple(a + h * b for a, b in zip(y, k))


def _rk4_step(grid, coords, y, prob, t, dt):
    k1 = _hj_rhs(grid, coords, y, prob, t)
    k2 = _hj_rhs(grid, coords, _add(y, k1, dt / 2), prob, t + dt / 2)
    k3 = _hj_rhs(grid, coords, _add(y, k2, dt / 2), prob, t + dt / 2)
    k4 = _hj_rhs(grid, coords, _add(y, k3, dt), prob, t + dt)
    return tuple(
        a + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )


def _check_caustic(grid: GridSpec, y, t: float) -> None:
    n, sper, quad, lin, const = y
    if float(n.min()) < DENSITY_NEGATIVE_FLOOR:
        raise CausticError(
            f"density turned negative at t={t:.6g}; the single-valued sheet has folded",
            time=t,
            reason="negative_density",
        )
    threshold = HESSIAN_FACTOR / min(grid.spacings)
    curvature = ActionField.from_parts(grid, periodic=sper, quad=quad, lin=lin).max_curvature()
    if curvature > threshold:
        raise CausticError(
            f"action curvature {curvature:.3g} exceeded {threshold:.3g} at t={t:.6g}",
            time=t,
            reason="phase_curvature",
        )


def _cfl_check(grid: GridSpec, y, prob: _HJProblem, dt: float) -> None:
    n, sper, quad, lin, const = y
    d = grid.dims
    coords = grid.meshes()
    field = ActionField.from_parts(grid, periodic=sper, quad=quad, lin=lin)
    g = field.gradient_values()
    vmax = 0.0
    for i in range(d):
        v_i = prob.drift[i] + sum(prob.mass_matrix[i, j] * g[j] for j in range(d))
        vmax = max(vmax, float(np.max(np.abs(v_i))))
    if vmax > 0 and dt > CFL_FRACTION * min(grid.spacings) / vmax:
        warnings.warn(
            f"dt={dt:.3g} exceeds the advection bound {CFL_FRACTION * min(grid.spacings) / vmax:.3g}; "
            "expect time-stepping error",
            stacklevel=3,
        )


def _evolve_fields(state, prob: _HJProblem, dt: float, steps: int, callback=None, stride: int = 1, state_cls=None):
    if steps < 0:
        raise ValidationError("steps must be non-negative")
    grid = state.grid
    coords = grid.meshes()
    y = (
        state.n.samples.copy(),
        state.S.periodic.samples.copy(),
        state.S.quad.copy(),
        state.S.lin.copy(),
        state.S.const,
    )
    t = state.time
    _cfl_check(grid, y, prob, dt)
    if callback is not None:
        callback(_pack_state(state_cls, grid, y, t))
    for k in range(steps):
        y = _rk4_step(grid, coords, y, prob, t, dt)
        t = state.time + (k + 1) * dt
        _check_caustic(grid, y, t)
        if callback is not None and (k + 1) % stride == 0:
            callback(_pack_state(state_cls, grid, y, t))
    return _pack_state(state_cls, grid, y, t)


def _pack_state(state_cls, grid, y, t):
    n, sper, quad, lin, const = y
    S = ActionField.from_parts(grid, periodic=sper, quad=quad, lin=lin, const=const)
    return state_cls(RealField(grid, n), S, t)


def _reject_vector(pot: PotentialSpec, what: str) -> None:
    if pot.has_vector:
        raise UnsupportedPotentialError(
            f"{what} requires A = 0; gauge-transform to an A = 0 frame first"
        )


def evolve_q_state(
    st: QStochasticState,
    pot: PotentialSpec,
    params: PhysicalParams,
    dt: float,
    steps: int,
    callback=None,
    stride: int = 1,
) -> QStochasticState:
    """Advance the continuity + Hamilton-Jacobi pair on the position grid."""
    _reject_vector(pot, "field evolution")
    if pot.dims != st.grid.dims:
        raise ValidationError("potential dimensionality does not match the state")
    tail = edge_mass_fraction(st.n)
    if tail > 1e-10:
        warnings.warn(f"initial density has boundary mass fraction {tail:.3g}", stacklevel=2)
    return _evolve_fields(st, _q_side_problem(pot, params), dt, steps, callback, stride, QStochasticState)


def evolve_p_state(
    st: PStochasticState,
    pot: PotentialSpec,
    params: PhysicalParams,
    dt: float,
    steps: int,
    callback=None,
    stride: int = 1,
) -> PStochasticState:
    """Advance the momentum-family pair; only polynomial potentials close."""
    _reject_vector(pot, "momentum-family evolution")
    if pot.periodic is not None:
        raise UnsupportedPotentialError(
            "momentum-family evolution supports free, uniform-field, and harmonic "
            "potentials only; general V(q) does not close over this family"
        )
    if pot.dims != st.grid.dims:
        raise ValidationError("potential dimensionality does not match the state")
    tail = edge_mass_fraction(st.n)
    if tail > 1e-10:
        warnings.warn(f"initial density has boundary mass fraction {tail:.3g}", stacklevel=2)
    return _evolve_fields(st, _p_side_problem(pot, params), dt, steps, callback, stride, PStochasticState)


# ---------------------------------------------------------------------------
# ensembles


def liouville_evolve_ensemble(
    ens: ParticleEnsemble,
    pot: PotentialSpec,
    params: PhysicalParams,
    dt: float,
    steps: int,
    box: GridSpec | None = None,
) -> ParticleEnsemble:
    """Kick-drift-kick leapfrog under H = p^2/2m + V; weights untouched."""
    _reject_vector(pot, "ensemble evolution")
    q = ens.q.copy()
    p = ens.p.copy()
    t = ens.time
    m = params.mass
    escaped = False
    grad = pot.gradient_at(q, t)
    for k in range(steps):
        p_half = p - 0.5 * dt * grad
        q = q + dt * p_half / m
        t = ens.time + (k + 1) * dt
        grad = pot.gradient_at(q, t)
        p = p_half - 0.5 * dt * grad
        if box is not None and not escaped:
            for i in range(box.dims):
                lo = box.origins[i]
                hi = lo + box.extents[i]
                if np.any(q[:, i] < lo) or np.any(q[:, i] >= hi):
                    warnings.warn(
                        f"trajectories left the declared box on axis {i} at t={t:.6g}",
                        stacklevel=2,
                    )
                    escaped = True
                    break
    return ParticleEnsemble(q, p, ens.w, t, dims=ens.dims)


def sample_ensemble_from_state(
    st: QStochasticState, count: int, seed: int
) -> ParticleEnsemble:
    """Draw equal-weight samples q ~ n(q), p = dS/dq(q)."""
    if count < 1:
        raise ValidationError("count must be positive")
    rng = np.random.default_rng(seed)
    grid = st.grid
    d = grid.dims
    masses = np.clip(st.n.samples, 0.0, None).reshape(-1)
    probs = masses / masses.sum()
    cells = rng.choice(masses.size, size=count, p=probs)
    idx = np.unravel_index(cells, grid.shape)
    q = np.empty((count, d))
    for i in range(d):
        # jitter is centered on the node: quadrature credits cell mass to the node
        half = 0.5 * grid.spacings[i]
        jitter = rng.uniform(-half, half, size=count)
        q[:, i] = grid.origins[i] + idx[i] * grid.spacings[i] + jitter
    p = st.S.gradient_at(q if d > 1 else q[:, 0])
    if d == 1:
        p = p[:, None]
    w = np.full(count, 1.0 / count)
    return ParticleEnsemble(q, p, w, st.time, dims=d)


# ---------------------------------------------------------------------------
# characteristics


def classical_trajectories(
    st: QStochasticState,
    pot: PotentialSpec,
    params: PhysicalParams,
    starts,
    dt: float,
    steps: int,
) -> TrajectoryBundle:
    """Integrate dq/dt = (dS/dq)/m along the evolving action field.

    The trajectory positions join the field unknowns inside one RK4 loop, so
    the curves see the action at the proper stage times.
    """
    _reject_vector(pot, "characteristic integration")
    grid = st.grid
    d = grid.dims
    coords = grid.meshes()
    prob = _q_side_problem(pot, params)
    X = _as_points(starts, d).copy()
    for i in range(d):
        lo, hi = grid.origins[i], grid.origins[i] + grid.extents[i]
        if np.any(X[:, i] < lo) or np.any(X[:, i] >= hi):
            raise ValidationError("trajectory starts must lie inside the box")

    def grad_at(y, pts):
        n, sper, quad, lin, const = y
        field = ActionField.from_parts(grid, periodic=sper, quad=quad, lin=lin)
        g = field.gradient_at(pts if d > 1 else pts[:, 0])
        return g[:, None] if d == 1 else g

    def velocity(y, pts):
        return grad_at(y, pts) @ prob.mass_matrix.T

    y = (
        st.n.samples.copy(),
        st.S.periodic.samples.copy(),
        st.S.quad.copy(),
        st.S.lin.copy(),
        st.S.const,
    )
    t = st.time
    times = [t]
    positions = [X.copy()]
    momenta = [grad_at(y, X)]
    for k in range(steps):
        k1 = _hj_rhs(grid, coords, y, prob, t)
        v1 = velocity(y, X)
        y2 = _add(y, k1, dt / 2)
        k2 = _hj_rhs(grid, coords, y2, prob, t + dt / 2)
        v2 = velocity(y2, X + 0.5 * dt * v1)
        y3 = _add(y, k2, dt / 2)
        k3 = _hj_rhs(grid, coords, y3, prob, t + dt / 2)
        v3 = velocity(y3, X + 0.5 * dt * v2)
        y4 = _add(y, k3, dt)
        k4 = _hj_rhs(grid, coords, y4, prob, t + dt)
        v4 = velocity(y4, X + dt * v3)
        y = tuple(
            a + (dt / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
        )
        X = X + (dt / 6.0) * (v1 + 2 * v2 + 2 * v3 + v4)
        t = st.time + (k + 1) * dt
        _check_caustic(grid, y, t)
        times.append(t)
        positions.append(X.copy())
        momenta.append(grad_at(y, X))
    return TrajectoryBundle(
        np.asarray(times), np.stack(positions), np.stack(momenta), pot.tag, st
    )


# ---------------------------------------------------------------------------
# variational diagnostics


def _hamiltonian_values(
    S: ActionField, grid: GridSpec, pot: PotentialSpec, params: PhysicalParams, t: float
) -> np.ndarray:
    g = S.gradient_values()
    a_vals = pot.vector_values(grid, t)
    kinetic = np.zeros(grid.shape)
    for i in range(grid.dims):
        gi = g[i] if a_vals is None else g[i] - params.charge * a_vals[i]
        kinetic = kinetic + gi * gi
    return kinetic / (2.0 * params.mass) + pot.values_on(grid, t).samples


def hj_time_derivative(
    st: QStochasticState, pot: PotentialSpec, params: PhysicalParams
) -> RealField:
    """dS/dt on an exact solution: -H(dS/dq, q, t).  A value table."""
    return RealField(st.grid, -_hamiltonian_values(st.S, st.grid, pot, params, st.time))


def lagrangian_density(
    st: QStochasticState,
    pot: PotentialSpec,
    params: PhysicalParams,
    dt_S=None,
) -> RealField:
    """L = n (dS/dt + H(dS/dq, q, t)); identically zero on exact solutions.

    dt_S comes from the evolution: by default the right-hand side -H of the
    state itself (exactly zero L by construction); pass a stored stencil to
    measure how far a perturbed state is from solving the equation.
    """
    if dt_S is None:
        dt_S = hj_time_derivative(st, pot, params)
    if isinstance(dt_S, ActionField):
        dts = dt_S.total_values()
    elif isinstance(dt_S, RealField):
        dts = dt_S.samples
    else:
        dts = np.asarray(dt_S, dtype=float)
    if dts.shape != st.grid.shape:
        raise ValidationError("dt_S shape does not match the state grid")
    H = _hamiltonian_values(st.S, st.grid, pot, params, st.time)
    return RealField(st.grid, st.n.samples * (dts + H))


def action_time_stencil(states: Sequence[QStochasticState]) -> RealField:
    """Centered-difference dS/dt from three equally spaced snapshots."""
    if len(states) != 3:
        raise ValidationError("need exactly three snapshots")
    t0, t1, t2 = (s.time for s in states)
    if abs((t2 - t1) - (t1 - t0)) > 1e-12 * max(abs(t2 - t0), 1.0):
        raise ValidationError("snapshots must be equally spaced in time")
    vals = (states[2].S.total_values() - states[0].S.total_values()) / (t2 - t0)
    return RealField(states[1].grid, vals)
