"""Maps between classical field pairs (n, S) and complex wavefunctions.

The forward map is psi = sqrt(n) exp(i S / hbar) on the position grid; the
momentum family uses psi_hat = sqrt(n) exp(-i S / hbar) on the conjugate
grid (the sign follows from the stationary-phase pairing of the two
families).  The inverse map recovers n = |psi|^2 and a continuous phase by
unwrapping from the density peak; integer phase windings around the box go
into the linear coefficient of the action, so the periodic residual stays
spectrally differentiable.

The quantum-pressure scalar carried by the classical side is

    sigma^2 = (hbar^2/4) [ (grad n / n)^2 + beta^2 n^(2/3) ]

and the matching momentum second-moment tensor adds the isotropic share
beta^2 n^(2/3)/3 per axis.  The minimal-coupling derivative used throughout
is D = grad - i (e/hbar) A, which makes D(psi e^(i e Lambda/hbar)) pick up
exactly the phase factor when A shifts by grad Lambda.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .classical import ActionField, PStochasticState, QStochasticState, normalized_density
from .core import (
    ComplexField,
    GridSpec,
    PhysicalParams,
    RealField,
    integrate,
    spectral_gradient,
    to_momentum_space,
)
from .errors import PhaseNodeError, ValidationError, VortexError
from .potentials import PotentialSpec

__all__ = [
    "WaveFunction",
    "madelung_forward",
    "madelung_inverse",
    "madelung_inverse_action",
    "madelung_forward_p",
    "madelung_inverse_p",
    "position_grid_for",
    "covariant_gradient",
    "density_floor_coverage",
    "sigma_squared",
    "second_moment_tensor",
    "averaged_lagrangian",
    "averaged_lagrangian_psi",
    "GaugeFunction",
    "gauge_transform",
]

NORM_TOLERANCE = 1e-6
DEFAULT_NODE_EPS = 1e-10
DEFAULT_DENSITY_FLOOR = 1e-12
SEAM_DENSITY_LIMIT = 1e-10


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Unit-norm complex field; carries the parameters fixing its hbar."""

    field: ComplexField
    params: PhysicalParams
    time: float = 0.0

    def __post_init__(self):
        norm = float(integrate(RealField(self.field.grid, np.abs(self.field.samples) ** 2)))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValidationError(f"wavefunction norm {norm!r} is not 1 within {NORM_TOLERANCE}")

    @classmethod
    def normalized(
        cls, grid: GridSpec, samples: np.ndarray, params: PhysicalParams, time: float = 0.0
    ) -> "WaveFunction":
        arr = np.asarray(samples, dtype=np.complex128)
        norm = np.sqrt(np.sum(np.abs(arr) ** 2) * grid.cell_volume)
        if norm == 0.0:
            raise ValidationError("cannot normalize an identically zero field")
        return cls(ComplexField(grid, arr / norm), params, time)

    @property
    def grid(self) -> GridSpec:
        return self.field.grid

    @property
    def samples(self) -> np.ndarray:
        return self.field.samples

    def density(self) -> RealField:
        return RealField(self.grid, np.abs(self.samples) ** 2)

    def momentum_representation(self) -> ComplexField:
        return to_momentum_space(self.field, self.params.hbar)

    def momentum_density(self) -> RealField:
        hat = self.momentum_representation()
        return RealField(hat.grid, np.abs(hat.samples) ** 2)


# ---------------------------------------------------------------------------
# phase topology helpers


def _interior_node_cells(n: np.ndarray, node_eps: float) -> list[tuple[int, ...]]:
    """Low-density cells not connected to the benign tail region.

    The density support is assumed connected on the torus: the below-floor
    component containing the antipode of the density peak is treated as the
    packet tail; every other below-floor cell marks an interior node.
    """
    mask = n < node_eps * float(n.max())
    if not mask.any():
        return []
    labels, count = ndimage.label(mask)
    parent = list(range(count + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    # stitch components across the periodic seams
    for axis in range(mask.ndim):
        lo = np.atleast_1d(np.take(labels, 0, axis=axis))
        hi = np.atleast_1d(np.take(labels, -1, axis=axis))
        for a, b in zip(lo.ravel(), hi.ravel()):
            if a > 0 and b > 0:
                union(int(a), int(b))

    peak = np.unravel_index(int(np.argmax(n)), n.shape)
    antipode = tuple((p + s // 2) % s for p, s in zip(peak, n.shape))
    if mask[antipode]:
        tail = find(int(labels[antipode]))
        roots = np.array([find(k) for k in range(count + 1)])
        interior = mask & (roots[labels] != tail)
    else:
        interior = mask
    return [tuple(int(v) for v in ix) for ix in np.argwhere(interior)]


def _vortex_plaquettes(values: np.ndarray, n: np.ndarray, floor: float) -> list[tuple[int, int]]:
    """Plaquettes with nonzero phase circulation, on trusted corners only."""
    a = np.angle(np.roll(values, -1, axis=0) * np.conj(values))
    b = np.angle(np.roll(values, -1, axis=1) * np.conj(values))
    residue = a + np.roll(b, -1, axis=0) - np.roll(a, -1, axis=1) - b
    ok = n >= floor
    corners = ok & np.roll(ok, -1, 0) & np.roll(ok, -1, 1) & np.roll(np.roll(ok, -1, 0), -1, 1)
    hot = corners & (np.abs(residue) > np.pi)
    return [tuple(int(v) for v in ix) for ix in np.argwhere(hot)]


def _line_winding(line: np.ndarray) -> int:
    steps = np.angle(line * np.conj(np.roll(line, 1)))
    return int(np.round(steps.sum() / (2.0 * np.pi)))


def _unwrap_circle(line: np.ndarray, start: int) -> np.ndarray:
    rolled = np.roll(line, -start)
    theta = np.empty(len(line))
    theta[0] = np.angle(rolled[0])
    steps = np.angle(rolled[1:] * np.conj(rolled[:-1]))
    theta[1:] = theta[0] + np.cumsum(steps)
    return np.roll(theta, start)


def _unwrap_torus(values: np.ndarray, start: tuple[int, int]) -> np.ndarray:
    i0, j0 = start
    anchor = _unwrap_circle(values[i0, :], j0)
    rolled = np.roll(values, -i0, axis=0)
    theta = np.empty(values.shape)
    theta[0, :] = anchor
    steps = np.angle(rolled[1:, :] * np.conj(rolled[:-1, :]))
    theta[1:, :] = anchor[None, :] + np.cumsum(steps, axis=0)
    return np.roll(theta, i0, axis=0)


def _continuous_phase(
    values: np.ndarray, grid: GridSpec, node_eps: float
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Unwrapped single-valued phase plus integer windings per axis.

    Windings are read along the grid lines through the density peak, so they
    are meaningful whenever the density does not vanish along those lines.
    """
    n = np.abs(values) ** 2
    nodes = _interior_node_cells(n, node_eps)
    if nodes:
        raise PhaseNodeError(
            f"density has {len(nodes)} interior node cell(s); the phase is not single-valued there",
            locations=nodes,
        )
    if grid.dims == 2:
        plaquettes = _vortex_plaquettes(values, n, node_eps * float(n.max()))
        if plaquettes:
            raise VortexError(
                f"phase circulates around {len(plaquettes)} plaquette(s); no single-valued action exists",
                plaquettes=plaquettes,
            )
    peak = np.unravel_index(int(np.argmax(n)), n.shape)
    if grid.dims == 1:
        windings = (_line_winding(values),)
    else:
        windings = (
            _line_winding(values[:, peak[1]]),
            _line_winding(values[peak[0], :]),
        )
    ramp = np.zeros(grid.shape)
    for axis, w in enumerate(windings):
        shape = [1] * grid.dims
        shape[axis] = grid.points[axis]
        ramp = ramp + (2.0 * np.pi * w * np.arange(grid.points[axis]) / grid.points[axis]).reshape(shape)
    chi = values * np.exp(-1j * ramp)
    if grid.dims == 1:
        theta = _unwrap_circle(chi, peak[0])
    else:
        theta = _unwrap_torus(chi, peak)
    return theta, windings


# ---------------------------------------------------------------------------
# forward and inverse maps


def _edge_peak_fraction(n: np.ndarray) -> float:
    peak = float(n.max())
    if peak <= 0.0:
        return 1.0
    edge = 0.0
    for axis in range(n.ndim):
        edge = max(edge, float(np.take(n, 0, axis=axis).max()))
        edge = max(edge, float(np.take(n, -1, axis=axis).max()))
    return edge / peak


def _check_phase_seam(S: ActionField, n: RealField, hbar: float) -> None:
    """The sampled exp(i S/hbar) must be effectively periodic.

    Either the phase jump across every seam is a multiple of 2 pi (zero
    quadratic part, box-commensurate slope) or the density vanishes at the
    boundary to within SEAM_DENSITY_LIMIT of its peak.
    """
    grid = S.grid
    coords = grid.meshes()
    defect = 0.0
    for k in range(grid.dims):
        L = grid.extents[k]
        jump = S.lin[k] * L + 0.5 * S.quad[k, k] * L * L
        jump = jump + sum(S.quad[k, j] * coords[j] for j in range(grid.dims)) * L
        cycles = jump / (2.0 * np.pi * hbar)
        defect = max(defect, float(np.max(np.abs(cycles - np.round(cycles)))))
    if defect < 1e-9:
        return
    if _edge_peak_fraction(n.samples) < SEAM_DENSITY_LIMIT:
        return
    raise ValidationError(
        "action slope is incommensurate with the box while the density does not "
        "vanish at the boundary; the resulting wavefunction would be discontinuous"
    )


def madelung_forward(state: QStochasticState, params: PhysicalParams) -> WaveFunction:
    """psi = sqrt(n) exp(i S / hbar), pointwise on the grid."""
    _check_phase_seam(state.S, state.n, params.hbar)
    amp = np.sqrt(np.clip(state.n.samples, 0.0, None))
    phase = state.S.total_values() / params.hbar
    return WaveFunction(ComplexField(state.grid, amp * np.exp(1j * phase)), params, state.time)


def madelung_forward_p(state: PStochasticState, params: PhysicalParams) -> WaveFunction:
    """Momentum-representation wavefunction sqrt(n(p)) exp(-i S(p)/hbar)."""
    _check_phase_seam(state.S, state.n, params.hbar)
    amp = np.sqrt(np.clip(state.n.samples, 0.0, None))
    phase = -state.S.total_values() / params.hbar
    return WaveFunction(ComplexField(state.grid, amp * np.exp(1j * phase)), params, state.time)


def madelung_inverse_action(
    psi: WaveFunction, node_eps: float = DEFAULT_NODE_EPS
) -> ActionField:
    """Continuous action hbar * arg(psi) with windings in the linear part."""
    grid = psi.grid
    hbar = psi.params.hbar
    theta, windings = _continuous_phase(psi.samples, grid, node_eps)
    slopes = np.array(
        [2.0 * np.pi * hbar * w / grid.extents[k] for k, w in enumerate(windings)]
    )
    const = -float(np.dot(slopes, grid.origins))
    return ActionField.from_parts(
        grid, periodic=hbar * theta, lin=slopes, const=const
    ).pinned()


def madelung_inverse(
    psi: WaveFunction, node_eps: float = DEFAULT_NODE_EPS
) -> QStochasticState:
    """Recover (n, S) from psi; raises if no single-valued phase exists."""
    S = madelung_inverse_action(psi, node_eps)
    n = normalized_density(psi.grid, np.abs(psi.samples) ** 2)
    return QStochasticState(n, S, psi.time)


def madelung_inverse_p(
    psi_hat: WaveFunction, node_eps: float = DEFAULT_NODE_EPS
) -> PStochasticState:
    """Momentum-family inverse: the action enters with the opposite sign."""
    S = madelung_inverse_action(psi_hat, node_eps)
    S = ActionField.from_parts(
        S.grid, periodic=-S.periodic.samples, quad=-S.quad, lin=-S.lin, const=-S.const
    ).pinned()
    n = normalized_density(psi_hat.grid, np.abs(psi_hat.samples) ** 2)
    return PStochasticState(n, S, psi_hat.time)


def position_grid_for(
    momentum_grid: GridSpec, hbar: float = 1.0, origins=None
) -> GridSpec:
    """The position grid whose conjugate is the given momentum grid."""
    exts = tuple(2.0 * np.pi * hbar / dp for dp in momentum_grid.spacings)
    if origins is None:
        origins = tuple(-0.5 * e for e in exts)
    grid = GridSpec(exts, momentum_grid.points, origins)
    if grid.momentum_grid(hbar) != momentum_grid:
        raise ValidationError("momentum grid is not centred on zero as a conjugate grid must be")
    return grid


# ---------------------------------------------------------------------------
# quantum-pressure scalar and tensor


def density_floor_coverage(
    n: RealField, floor_rel: float = DEFAULT_DENSITY_FLOOR
) -> float:
    """Probability mass carried by cells above the masking floor.

    Quantities built from grad(n)/n are masked to zero below
    floor_rel * max(n); this reports how much of the distribution those
    masked cells actually hold (1.0 means the mask is harmless).
    """
    s = n.samples
    keep = np.where(s >= floor_rel * float(s.max()), s, 0.0)
    total = float(integrate(n))
    if total <= 0.0:
        raise ValidationError("density has no positive mass")
    return float(integrate(RealField(n.grid, keep))) / total


def sigma_squared(
    n: RealField, params: PhysicalParams, floor_rel: float = DEFAULT_DENSITY_FLOOR
) -> RealField:
    """sigma^2 = (hbar^2/4)[(grad n / n)^2 + beta^2 n^(2/3)].

    The ratio term is set to zero where n is below floor_rel times its peak;
    those cells carry negligible probability but would otherwise divide by
    noise.
    """
    s = n.samples
    floor = floor_rel * float(s.max())
    safe = s >= floor
    ratio = np.zeros(n.grid.shape)
    for axis in range(n.grid.dims):
        gi = spectral_gradient(n, axis).samples
        ratio[safe] += (gi[safe] / s[safe]) ** 2
    amp = np.cbrt(np.clip(s, 0.0, None) ** 2)
    out = 0.25 * params.hbar**2 * (ratio + params.beta**2 * amp)
    return RealField(n.grid, out)


def second_moment_tensor(
    n: RealField,
    S: ActionField,
    params: PhysicalParams,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> np.ndarray:
    """Conditional second moments of the conjugate variable, shape (d, d) + grid.

    T_ij = dS_i dS_j + (hbar^2/4)[dn_i dn_j / n^2 + (delta_ij/3) beta^2 n^(2/3)]

    The isotropic 1/3 split of the beta term is kept in every dimension, so
    the trace matches sigma_squared only in three dimensions; energies built
    from this tensor therefore use sigma_squared directly.
    """
    grid = n.grid
    d = grid.dims
    s = n.samples
    floor = floor_rel * float(s.max())
    safe = s >= floor
    g = S.gradient_values()
    gn = [spectral_gradient(n, axis).samples for axis in range(d)]
    amp = np.cbrt(np.clip(s, 0.0, None) ** 2)
    out = np.zeros((d, d) + grid.shape)
    for i in range(d):
        for j in range(d):
            term = g[i] * g[j]
            corr = np.zeros(grid.shape)
            corr[safe] = gn[i][safe] * gn[j][safe] / s[safe] ** 2
            term = term + 0.25 * params.hbar**2 * corr
            if i == j:
                term = term + 0.25 * params.hbar**2 * params.beta**2 * amp / 3.0
            out[i, j] = term
    return out


# ---------------------------------------------------------------------------
# averaged Lagrangians


def _coerce_time_derivative(grid: GridSpec, dt_S) -> np.ndarray:
    if isinstance(dt_S, ActionField):
        return dt_S.total_values()
    if isinstance(dt_S, RealField):
        return dt_S.samples
    arr = np.asarray(dt_S, dtype=float)
    if arr.shape != grid.shape:
        raise ValidationError("time derivative shape does not match the grid")
    return arr


def averaged_lagrangian(
    state: QStochasticState,
    pot: PotentialSpec,
    params: PhysicalParams,
    dt_S,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> RealField:
    """Pointwise n [dS/dt + (grad S - eA)^2/2m + sigma^2/2m + V].

    Integrates to the same value as the wavefunction form below whenever
    psi = sqrt(n) exp(iS/hbar); both are gauge invariant pointwise.
    """
    grid = state.grid
    t = state.time
    dts = _coerce_time_derivative(grid, dt_S)
    g = state.S.gradient_values()
    a_vals = pot.vector_values(grid, t)
    kin = np.zeros(grid.shape)
    for i in range(grid.dims):
        gi = g[i] if a_vals is None else g[i] - params.charge * a_vals[i]
        kin += gi * gi
    kin /= 2.0 * params.mass
    sig = sigma_squared(state.n, params, floor_rel).samples / (2.0 * params.mass)
    v = pot.values_on(grid, t).samples
    return RealField(grid, state.n.samples * (dts + kin + sig + v))


def averaged_lagrangian_psi(
    psi: WaveFunction,
    pot: PotentialSpec,
    params: PhysicalParams,
    dt_psi: ComplexField,
) -> RealField:
    """Pointwise hbar Im(conj(psi) d_t psi) + (hbar^2/2m)|D psi|^2 + V|psi|^2
    + (beta^2 hbar^2 / 8m)|psi|^(10/3)."""
    grid = psi.grid
    if dt_psi.grid != grid:
        raise ValidationError("time derivative lives on a different grid")
    t = psi.time
    n = np.abs(psi.samples) ** 2
    dpsi = covariant_gradient(psi, pot, params)
    kin = np.zeros(grid.shape)
    for comp in dpsi:
        kin += np.abs(comp.samples) ** 2
    kin *= params.hbar**2 / (2.0 * params.mass)
    time_term = params.hbar * np.imag(np.conj(psi.samples) * dt_psi.samples)
    v = pot.values_on(grid, t).samples * n
    beta_term = params.beta**2 * params.hbar**2 / (8.0 * params.mass) * np.cbrt(n**5)
    return RealField(grid, time_term + kin + v + beta_term)


def covariant_gradient(
    psi: WaveFunction, pot: PotentialSpec | None, params: PhysicalParams
) -> list[ComplexField]:
    """D_i psi = d_i psi - i (e/hbar) A_i psi, one component per axis."""
    grid = psi.grid
    a_vals = pot.vector_values(grid, psi.time) if pot is not None else None
    out = []
    for axis in range(grid.dims):
        comp = spectral_gradient(psi.field, axis).samples
        if a_vals is not None:
            comp = comp - 1j * (params.charge / params.hbar) * a_vals[axis] * psi.samples
        out.append(ComplexField(grid, comp))
    return out


# ---------------------------------------------------------------------------
# gauge transformations


@dataclass(frozen=True, eq=False)
class GaugeFunction:
    """Separable gauge Lambda(q, t) = spatial(q) * poly(t).

    `spatial` is a periodic field (or a bare constant); `time_coeffs` are
    polynomial coefficients c_0 + c_1 t + ...  The transformation acts as
    psi -> psi exp(i e Lambda / hbar), A -> A + grad Lambda, V -> V - e dLambda/dt.
    """

    spatial: RealField | float
    time_coeffs: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.time_coeffs)
        if not coeffs:
            raise ValidationError("time_coeffs must not be empty")
        object.__setattr__(self, "time_coeffs", coeffs)

    def _factor(self, t: float) -> float:
        return float(sum(c * t**k for k, c in enumerate(self.time_coeffs)))

    def _factor_dot(self, t: float) -> float:
        return float(sum(k * c * t ** (k - 1) for k, c in enumerate(self.time_coeffs) if k > 0))

    @property
    def time_dependent(self) -> bool:
        return any(c != 0.0 for c in self.time_coeffs[1:])

    def _spatial_values(self, grid: GridSpec) -> np.ndarray:
        if isinstance(self.spatial, RealField):
            if self.spatial.grid != grid:
                raise ValidationError("gauge function lives on a different grid")
            return self.spatial.samples
        return np.full(grid.shape, float(self.spatial))

    def values(self, grid: GridSpec, t: float) -> np.ndarray:
        return self._spatial_values(grid) * self._factor(t)

    def time_derivative(self, grid: GridSpec, t: float) -> np.ndarray:
        return self._spatial_values(grid) * self._factor_dot(t)

    def gradient(self, grid: GridSpec, t: float) -> tuple[np.ndarray, ...]:
        if not isinstance(self.spatial, RealField):
            return tuple(np.zeros(grid.shape) for _ in range(grid.dims))
        fac = self._factor(t)
        return tuple(
            fac * spectral_gradient(self.spatial, axis).samples for axis in range(grid.dims)
        )


def gauge_transform(
    target: WaveFunction | QStochasticState,
    pot: PotentialSpec,
    params: PhysicalParams,
    gauge: GaugeFunction,
) -> tuple[WaveFunction | QStochasticState, PotentialSpec]:
    """Shift (S, A, V) by (e Lambda, grad Lambda, -e dLambda/dt).

    A wavefunction picks up the phase e^(i e Lambda/hbar); a classical state
    has e Lambda added to its action.  Physical quantities (|psi|, kinetic
    momentum, the averaged Lagrangian) are unchanged pointwise.
    """
    grid = target.grid
    t = target.time
    if isinstance(target, WaveFunction):
        phase = params.charge * gauge.values(grid, t) / params.hbar
        new_target: WaveFunction | QStochasticState = WaveFunction(
            ComplexField(grid, target.samples * np.exp(1j * phase)), params, t
        )
    else:
        shifted = target.S.add_periodic(params.charge * gauge.values(grid, t))
        new_target = QStochasticState(target.n, shifted, t)

    extra_periodic = None
    if gauge.time_dependent:
        def extra_periodic(g: GridSpec, tt: float) -> np.ndarray:
            return -params.charge * gauge.time_derivative(g, tt)

    extra_vector = None
    if isinstance(gauge.spatial, RealField):
        def extra_vector(g: GridSpec, tt: float) -> tuple[np.ndarray, ...]:
            return gauge.gradient(g, tt)

    static = pot.static and not gauge.time_dependent
    new_pot = pot.with_extra(
        tag=f"{pot.tag}+gauge",
        extra_periodic=extra_periodic,
        extra_vector=extra_vector,
        static=static,
    )
    return new_target, new_pot
